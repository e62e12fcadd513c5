//! C ABI over `punctext`.
//!
//! Every fallible call returns a [`PtxStatus`]; on failure the message is
//! available from [`ptx_last_error_message`] on the same thread. Strings
//! handed out by this library must be released with [`ptx_string_free`],
//! engines with [`ptx_engine_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use punctext::corpus::{tokenize, Dictionary};
use punctext::ice::{word_character_score, FilterBank, Ice, KeepRatio, Scorer, Selection};
use punctext::metrics;
use punctext::phy::{LdpcCode, SymbolBudget};
use punctext::recover::{indicate, DictionaryRecoverer, IndicatedText};
use punctext::runner::{Pipeline, PipelineParams, Status, TransmissionPoint};
use punctext::spellkit::SpellIndex;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    UnsupportedText = 4,
    BufferTooSmall = 5,
    BrokenFrame = 6,
    Io = 7,
    Panic = 8,
}

/// Outcome of one transmitted sentence.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtxTrial {
    /// 0 ok, 1 frame lost, 2 failed.
    pub status: u32,
    pub bleu: f64,
    pub char_accuracy: f64,
    pub word_accuracy: f64,
    pub omitted: usize,
    pub symbols: usize,
}

/// Opaque engine: dictionary index, filter bank and link.
pub struct PtxEngine {
    index: Arc<SpellIndex>,
    scorer: Arc<Scorer>,
    pipeline: Pipeline,
    bank: Arc<FilterBank>,
    filters: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(PtxStatus, String);

type FfiResult<T> = Result<T, Fail>;

fn fail<T>(status: PtxStatus, msg: impl Into<String>) -> FfiResult<T> {
    Err(Fail(status, msg.into()))
}

/// Runs `f`, turning errors and panics into a status plus the thread's last error.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> PtxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtxStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside punctext");
            PtxStatus::Panic
        }
    }
}

unsafe fn text_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return fail(PtxStatus::NullPointer, format!("{name} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(PtxStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn engine_arg<'a>(p: *const PtxEngine) -> FfiResult<&'a PtxEngine> {
    p.as_ref().ok_or(Fail(PtxStatus::NullPointer, "engine is null".into()))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or(Fail(PtxStatus::NullPointer, format!("{name} is null")))
}

fn into_c(s: String) -> FfiResult<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .or_else(|_| fail(PtxStatus::InvalidArgument, "string holds a NUL byte"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ptx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or NULL if there is none.
/// Release with [`ptx_string_free`].
#[no_mangle]
pub extern "C" fn ptx_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |s| s.clone().into_raw()))
}

/// # Safety
/// `s` is NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ptx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates an engine. `dictionary_path` may be NULL for the bundled word
/// list. `keep_ratio` lies in (0, 1]; `filters` and `window_len` are at least 1.
///
/// # Safety
/// `dictionary_path` is NULL or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ptx_engine_new(
    dictionary_path: *const c_char,
    window_len: usize,
    filters: usize,
    keep_ratio: f64,
    seed: u64,
    out: *mut *mut PtxEngine,
) -> PtxStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let dict = if dictionary_path.is_null() {
            Dictionary::bundled()
        } else {
            let path = text_arg(dictionary_path, "dictionary_path")?;
            Dictionary::from_path(path).map_err(|e| Fail(PtxStatus::Io, format!("{path}: {e}")))?
        };
        let keep = KeepRatio::new(keep_ratio).map_err(|e| Fail(PtxStatus::InvalidArgument, e.to_string()))?;
        let index = Arc::new(SpellIndex::new(&dict));
        let params = PipelineParams {
            window_len,
            bank_seed: seed,
            ..PipelineParams::default()
        };
        let recoverer = Box::new(DictionaryRecoverer::new(Arc::clone(&index)));
        let pipeline = Pipeline::new(params.clone(), Arc::clone(&index), Arc::new(LdpcCode::bundled()), recoverer, None);
        let bank = pipeline
            .bank(filters, keep)
            .map_err(|e| Fail(PtxStatus::InvalidArgument, e.to_string()))?;
        *out = Box::into_raw(Box::new(PtxEngine {
            scorer: Arc::new(Scorer::new(Arc::clone(&index), params.scores)),
            index,
            pipeline,
            bank,
            filters,
        }));
        Ok(())
    })
}

/// # Safety
/// `engine` is NULL or was returned by [`ptx_engine_new`] and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ptx_engine_free(engine: *mut PtxEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Writes the importance score of each letter of `word` into `scores`
/// (capacity `cap`) and its length into `len`. With a short buffer the call
/// fails with `BufferTooSmall` after setting `len`.
///
/// # Safety
/// Pointers are valid; `scores` has room for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn ptx_score_word(
    engine: *const PtxEngine,
    word: *const c_char,
    scores: *mut f64,
    cap: usize,
    len: *mut usize,
) -> PtxStatus {
    guard(|| {
        let e = engine_arg(engine)?;
        let word = text_arg(word, "word")?;
        let len = out_arg(len, "len")?;
        if word.is_empty() || !word.bytes().all(|b| b.is_ascii_alphabetic()) {
            return fail(PtxStatus::InvalidArgument, "word must be ASCII letters");
        }
        let s = word_character_score(&word.to_ascii_lowercase(), &e.index, &e.scorer.params());
        *len = s.len();
        if cap < s.len() {
            return fail(PtxStatus::BufferTooSmall, format!("need {} scores", s.len()));
        }
        if scores.is_null() {
            return fail(PtxStatus::NullPointer, "scores is null");
        }
        ptr::copy_nonoverlapping(s.as_ptr(), scores, s.len());
        Ok(())
    })
}

/// Punctures `text`. `random_seed < 0` selects filters by score, otherwise
/// uniformly with that seed. The kept characters go to `payload` (free with
/// [`ptx_string_free`]), one filter index per window to `indices`.
///
/// # Safety
/// Pointers are valid; `indices` has room for `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn ptx_puncture(
    engine: *const PtxEngine,
    text: *const c_char,
    random_seed: i64,
    payload: *mut *mut c_char,
    indices: *mut u32,
    cap: usize,
    count: *mut usize,
    tail_unpunctured: *mut bool,
) -> PtxStatus {
    guard(|| {
        let e = engine_arg(engine)?;
        let text = text_arg(text, "text")?;
        let payload = out_arg(payload, "payload")?;
        let count = out_arg(count, "count")?;
        let tail = out_arg(tail_unpunctured, "tail_unpunctured")?;
        *payload = ptr::null_mut();
        let t = tokenize(text).map_err(|err| Fail(PtxStatus::UnsupportedText, err.to_string()))?;
        let selection = if random_seed < 0 {
            Selection::Proposed
        } else {
            Selection::Random(random_seed as u64)
        };
        let p = Ice::new(Arc::clone(&e.scorer), Arc::clone(&e.bank)).puncture_text(&t, selection);
        let idx = p.filter_indices();
        *count = idx.len();
        if cap < idx.len() {
            return fail(PtxStatus::BufferTooSmall, format!("need {} indices", idx.len()));
        }
        if !idx.is_empty() && indices.is_null() {
            return fail(PtxStatus::NullPointer, "indices is null");
        }
        for (i, &v) in idx.iter().enumerate() {
            *indices.add(i) = v as u32;
        }
        *tail = p.tail_unpunctured;
        *payload = into_c(p.payload())?;
        Ok(())
    })
}

/// Re-inserts `*` at the dropped positions; the result goes to `out`.
///
/// # Safety
/// Pointers are valid; `indices` holds `count` entries.
#[no_mangle]
pub unsafe extern "C" fn ptx_indicate(
    engine: *const PtxEngine,
    payload: *const c_char,
    indices: *const u32,
    count: usize,
    tail_unpunctured: bool,
    out: *mut *mut c_char,
) -> PtxStatus {
    guard(|| {
        let e = engine_arg(engine)?;
        let payload = text_arg(payload, "payload")?;
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let idx: &[u32] = if count == 0 {
            &[]
        } else if indices.is_null() {
            return fail(PtxStatus::NullPointer, "indices is null");
        } else {
            std::slice::from_raw_parts(indices, count)
        };
        let m = indicate(payload, idx, &e.bank, tail_unpunctured)
            .map_err(|err| Fail(PtxStatus::BrokenFrame, err.to_string()))?;
        *out = into_c(m.as_str().to_string())?;
        Ok(())
    })
}

/// Fills every `*` of `indicated` with the dictionary backend.
///
/// # Safety
/// Pointers are valid.
#[no_mangle]
pub unsafe extern "C" fn ptx_recover(engine: *const PtxEngine, indicated: *const c_char, out: *mut *mut c_char) -> PtxStatus {
    guard(|| {
        let e = engine_arg(engine)?;
        let m = text_arg(indicated, "indicated")?;
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let r = e.pipeline.recoverer().recover(&IndicatedText::from_marked(m));
        *out = into_c(r.text)?;
        Ok(())
    })
}

/// Sends `text` through the whole chain. `snr_db` may be infinite for a
/// noiseless channel; `symbols_per_char <= 0` pads to whole codewords.
/// `recovered` may be NULL; otherwise it receives the recovered text.
///
/// # Safety
/// Pointers are valid.
#[no_mangle]
pub unsafe extern "C" fn ptx_transmit(
    engine: *const PtxEngine,
    text: *const c_char,
    snr_db: f64,
    symbols_per_char: f64,
    noise_seed: u64,
    trial: *mut PtxTrial,
    recovered: *mut *mut c_char,
) -> PtxStatus {
    guard(|| {
        let e = engine_arg(engine)?;
        let text = text_arg(text, "text")?;
        let trial = out_arg(trial, "trial")?;
        if snr_db.is_nan() {
            return fail(PtxStatus::InvalidArgument, "snr_db is NaN");
        }
        let budget = if symbols_per_char > 0.0 {
            SymbolBudget::PerCharacter(symbols_per_char)
        } else {
            SymbolBudget::Natural
        };
        let point = TransmissionPoint {
            filters: e.filters,
            keep: e.bank.keep(),
            snr_db,
            budget,
        };
        let r = e.pipeline.transmit(text, &point, Selection::Proposed, noise_seed);
        *trial = PtxTrial {
            status: match r.status {
                Status::Ok => 0,
                Status::FrameLost => 1,
                Status::Failed => 2,
            },
            bleu: r.eval.bleu,
            char_accuracy: r.eval.char_accuracy,
            word_accuracy: r.eval.word_accuracy,
            omitted: r.omitted,
            symbols: r.symbols.unwrap_or(0),
        };
        if let Some(out) = recovered.as_mut() {
            *out = into_c(r.recovered)?;
        }
        if r.status == Status::Failed {
            return fail(PtxStatus::UnsupportedText, r.error.unwrap_or_default());
        }
        Ok(())
    })
}

/// Sentence BLEU of `candidate` against `reference`.
///
/// # Safety
/// Pointers are valid.
#[no_mangle]
pub unsafe extern "C" fn ptx_bleu(reference: *const c_char, candidate: *const c_char, max_n: usize, out: *mut f64) -> PtxStatus {
    guard(|| {
        let r = text_arg(reference, "reference")?;
        let c = text_arg(candidate, "candidate")?;
        let out = out_arg(out, "out")?;
        *out = metrics::bleu(r, c, max_n).map_err(|e| Fail(PtxStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}
