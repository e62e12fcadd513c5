//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Criteria run concurrently; lines print in a fixed order.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use punctext::corpus::{Corpus, Dictionary};
use punctext::ice::{select_filter, word_character_score, FilterBank, KeepRatio, ScoreParams, ScoreVector, Selection};
use punctext::metrics::bleu;
use punctext::phy::{
    awgn, qpsk_demodulate_hard, qpsk_llr, qpsk_modulate, ChannelConfig, LdpcCode, SymbolBudget,
};
use punctext::runner::{
    paired_t_test, run_sweep, sweep, Arm, Experiment, Pipeline, PipelineParams, RunConfig, TransmissionPoint,
    TrialRecord,
};
use punctext::spellkit::{Pattern, SpellIndex};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bundled_sentences() -> Vec<String> {
    Corpus::bundled().sentences
}

/// Per-trial values of one arm, in trial order.
fn column(records: &[TrialRecord], point: usize, arm: Arm, f: fn(&TrialRecord) -> f64) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.point == point && r.arm == arm)
        .map(f)
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn algorithm1_summer() -> Outcome {
    let started = Instant::now();
    let index = SpellIndex::new(&Dictionary::bundled());
    let p = ScoreParams::default();
    let s = word_character_score("summer", &index, &p);
    let elapsed = started.elapsed();
    let e = s[4];
    let u = s[1];
    check(
        e == -p.alpha && u == -p.beta / 2.0 && elapsed < Duration::from_secs(1),
        format!("'e' = {e}, 'u' = {u}, scores {s:?}, {:.3}s", elapsed.as_secs_f64()),
    )
}

/// Literal Levenshtein distance where `*` equals no character.
fn oracle_distance(a: &[u8], b: &[u8]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, &x) in a.iter().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, &y) in b.iter().enumerate() {
            let sub = usize::from(x == b'*' || x != y);
            cur[j + 1] = (prev[j] + sub).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

fn spell_oracle() -> Outcome {
    let dict = Dictionary::bundled();
    let index = SpellIndex::new(&dict);
    let words = dict.words();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = 0;
    let mut indexed = Duration::ZERO;
    let mut nonempty = 0;
    for _ in 0..1000 {
        let mut bytes: Vec<u8> = if rng.random_bool(0.8) {
            let w = words[rng.random_range(0..words.len())].as_bytes();
            w[..w.len().min(8)].to_vec()
        } else {
            (0..rng.random_range(1..=8)).map(|_| rng.random_range(b'a'..=b'z')).collect()
        };
        for _ in 0..rng.random_range(0..=2) {
            if rng.random_bool(0.5) && bytes.len() < 8 {
                let at = rng.random_range(0..=bytes.len());
                bytes.insert(at, b'*');
            } else {
                let at = rng.random_range(0..bytes.len());
                bytes[at] = b'*';
            }
        }
        let pattern = Pattern::new(std::str::from_utf8(&bytes).unwrap()).unwrap();
        for d in [1, 2] {
            let t = Instant::now();
            let got = index.candidates(&pattern, d);
            indexed += t.elapsed();
            let mut expect: Vec<&String> = words
                .iter()
                .filter(|w| oracle_distance(pattern.as_bytes(), w.as_bytes()) <= d)
                .collect();
            expect.sort_by(|a, b| dict.freq(b).cmp(&dict.freq(a)).then(a.cmp(b)));
            let expect: Vec<String> = expect.into_iter().cloned().collect();
            nonempty += usize::from(!expect.is_empty());
            if got.words() != expect.as_slice() {
                mismatches += 1;
            }
        }
    }
    check(
        mismatches == 0 && indexed < Duration::from_secs(60),
        format!(
            "{mismatches} mismatches over 2000 queries ({nonempty} non-empty), index time {:.3}s",
            indexed.as_secs_f64()
        ),
    )
}

fn selection_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut mismatches = 0;
    let mut ties = 0;
    for trial in 0..10_000u64 {
        let l_f = rng.random_range(1..=48);
        let m = rng.random_range(1..=70);
        let keep = KeepRatio::new(rng.random_range(0.05..=1.0)).unwrap();
        let bank = FilterBank::generate(trial, m, l_f, keep).unwrap();
        // coarse values make ties common
        let scores: Vec<f64> = (0..l_f)
            .map(|_| {
                if rng.random_bool(0.5) {
                    -f64::from(rng.random_range(0..4u8)) / 2.0
                } else {
                    -rng.random_range(0.0..3.0)
                }
            })
            .collect();
        let sv = ScoreVector {
            scores: scores.clone(),
            params: ScoreParams::default(),
        };
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        let mut tied = false;
        for (i, f) in bank.filters().iter().enumerate() {
            let v: f64 = f
                .to_vec()
                .iter()
                .zip(&scores)
                .filter(|(&k, _)| k == 1)
                .map(|(_, &s)| s)
                .sum();
            if v > best_val {
                best_val = v;
                best = i;
                tied = false;
            } else if v == best_val {
                tied = true;
            }
        }
        ties += usize::from(tied);
        if select_filter(&sv, &bank) != best {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("{mismatches} mismatches over 10000 pairs ({ties} with tied maxima)"))
}

fn noiseless_config(filters: Vec<usize>) -> RunConfig {
    RunConfig {
        filters,
        keep_ratio: vec![0.9],
        snr_db: vec![f64::INFINITY],
        trials: 500,
        ..RunConfig::default()
    }
}

fn selection_superiority() -> Outcome {
    let started = Instant::now();
    let sentences = bundled_sentences();
    let cfg = noiseless_config(vec![64]);
    let pipeline = Pipeline::from_config(&cfg).map_err(|e| e.to_string())?;
    let records = run_sweep(&cfg, &pipeline, &sentences, &mut std::io::sink()).map_err(|e| e.to_string())?;
    let proposed = column(&records, 0, Arm::Proposed, |r| r.word_accuracy);
    let random = column(&records, 0, Arm::Random, |r| r.word_accuracy);
    let t = paired_t_test(&proposed, &random);
    let elapsed = started.elapsed();
    check(
        t.p < 0.01 && t.mean_diff >= 0.02 && elapsed < Duration::from_secs(600),
        format!(
            "word_accuracy proposed {:.4} vs random {:.4} over {} sentences, gap {:.4}, p = {:.2e}, {:.1}s",
            mean(&proposed),
            mean(&random),
            t.n,
            t.mean_diff,
            t.p,
            elapsed.as_secs_f64()
        ),
    )
}

fn monotone_in_m() -> Outcome {
    let sentences = bundled_sentences();
    let cfg = noiseless_config(vec![4, 16, 64]);
    let pipeline = Pipeline::from_config(&cfg).map_err(|e| e.to_string())?;
    let records = run_sweep(&cfg, &pipeline, &sentences, &mut std::io::sink()).map_err(|e| e.to_string())?;
    let cols: Vec<Vec<f64>> = (0..3)
        .map(|p| column(&records, p, Arm::Proposed, |r| r.word_accuracy))
        .collect();
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    // a decrease counts only if it is significant at the 5% level
    let drops: Vec<f64> = (0..2).map(|i| paired_t_test(&cols[i], &cols[i + 1]).p).collect();
    check(
        drops.iter().all(|&p| p >= 0.05),
        format!(
            "word_accuracy at M = 4, 16, 64: {:.4}, {:.4}, {:.4}; p(decrease) = {:.2e}, {:.2e}",
            means[0], means[1], means[2], drops[0], drops[1]
        ),
    )
}

fn character_vs_word() -> Outcome {
    let sentences = bundled_sentences();
    let cfg = RunConfig {
        experiment: Experiment::Omission,
        word_ratio: vec![0.9],
        trials: 500,
        ..RunConfig::default()
    };
    let pipeline = Pipeline::from_config(&cfg).map_err(|e| e.to_string())?;
    let records = run_sweep(&cfg, &pipeline, &sentences, &mut std::io::sink()).map_err(|e| e.to_string())?;
    let budgets_match = records.chunks(2).all(|pair| pair[0].omitted == pair[1].omitted);
    let character = column(&records, 0, Arm::Character, |r| r.bleu);
    let word = column(&records, 0, Arm::Word, |r| r.bleu);
    let t = paired_t_test(&character, &word);
    check(
        budgets_match && t.p < 0.01 && t.mean_diff > 0.0,
        format!(
            "BLEU character {:.4} vs word {:.4}, p = {:.2e}, budgets matched: {budgets_match}",
            mean(&character),
            mean(&word),
            t.p
        ),
    )
}

/// Standard normal upper tail.
fn q(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

fn phy_correctness() -> Outcome {
    let started = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let bits_per_point = 4_000_000;
    for ebn0 in [2.0f64, 4.0, 6.0] {
        let bits: Vec<u8> = (0..bits_per_point).map(|_| rng.random_range(0..2u8)).collect();
        // Es = 2 Eb for QPSK
        let ch = ChannelConfig::new(ebn0 + 10.0 * 2f64.log10(), 1000 + ebn0 as u64);
        let rx = qpsk_demodulate_hard(&awgn(&qpsk_modulate(&bits), &ch), &ch);
        let errors = bits.iter().zip(&rx).filter(|(a, b)| a != b).count();
        let ber = errors as f64 / bits.len() as f64;
        let theory = q((2.0 * 10f64.powf(ebn0 / 10.0)).sqrt());
        let rel = (ber - theory).abs() / theory;
        ok &= rel < 0.05;
        notes.push(format!("BER@{ebn0}dB {ber:.3e}/{theory:.3e}"));
    }

    let code = LdpcCode::bundled();
    let mut bad_codewords = 0;
    for _ in 0..2000 {
        let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
        let c = code.encode(&msg).map_err(|e| e.to_string())?;
        bad_codewords += usize::from(code.syndrome(&c).iter().any(|&s| s != 0));
    }
    ok &= bad_codewords == 0;
    notes.push(format!("{bad_codewords}/2000 codewords fail H c = 0"));

    let frames = 400;
    let (mut coded_fail, mut uncoded_fail) = (0, 0);
    for f in 0..frames {
        let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
        let ch = ChannelConfig::new(2.0, 5000 + f);
        let rx = qpsk_demodulate_hard(&awgn(&qpsk_modulate(&msg), &ch), &ch);
        uncoded_fail += usize::from(rx != msg);
        let c = code.encode(&msg).map_err(|e| e.to_string())?;
        let llr = qpsk_llr(&awgn(&qpsk_modulate(&c), &ch), &ch);
        let d = code.decode(&llr, 50).map_err(|e| e.to_string())?;
        coded_fail += usize::from(d.message != msg);
        if d.converged && !code.is_codeword(&d.codeword) {
            bad_codewords += 1;
        }
    }
    ok &= coded_fail < uncoded_fail && bad_codewords == 0;
    notes.push(format!("FER@Es/N0=2dB coded {coded_fail}/{frames} vs uncoded {uncoded_fail}/{frames}"));
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(300);
    notes.push(format!("{:.1}s", elapsed.as_secs_f64()));
    check(ok, notes.join(", "))
}

fn lossless_identity() -> Outcome {
    let sentences = bundled_sentences();
    let pipeline = Pipeline::deterministic(PipelineParams::default());
    let point = TransmissionPoint {
        filters: 64,
        keep: KeepRatio::FULL,
        snr_db: 20.0,
        budget: SymbolBudget::Natural,
    };
    let mut imperfect = 0;
    for (i, s) in sentences.iter().enumerate() {
        let r = pipeline.transmit(s, &point, Selection::Proposed, i as u64);
        if r.eval.bleu != 1.0 || r.eval.char_accuracy != 1.0 {
            imperfect += 1;
        }
    }
    check(
        imperfect == 0 && sentences.len() == 500,
        format!("{imperfect} of {} sentences not restored exactly", sentences.len()),
    )
}

/// Symbols per original character available to both pipelines.
const LOW_SNR_BUDGET: f64 = 10.0;

fn low_snr_ordering() -> Outcome {
    let sentences = bundled_sentences();
    let pipeline = Pipeline::deterministic(PipelineParams::default());
    let budget = SymbolBudget::PerCharacter(LOW_SNR_BUDGET);
    let run = |snr_db: f64, keep: KeepRatio, filters: usize| -> Vec<f64> {
        let point = TransmissionPoint {
            filters,
            keep,
            snr_db,
            budget,
        };
        sentences
            .iter()
            .enumerate()
            .map(|(i, s)| pipeline.transmit(s, &point, Selection::Proposed, 77 + i as u64).eval.char_accuracy)
            .collect()
    };
    let keep = KeepRatio::new(0.8).unwrap();
    let (p0, u0) = (run(0.0, keep, 64), run(0.0, KeepRatio::FULL, 1));
    let (p10, u10) = (run(10.0, keep, 64), run(10.0, KeepRatio::FULL, 1));
    let low = paired_t_test(&p0, &u0);
    let high = mean(&p10) - mean(&u10);
    check(
        low.mean_diff > 0.0 && high <= 0.005,
        format!(
            "char_accuracy at {LOW_SNR_BUDGET} symbols/char: 0 dB punctured {:.4} vs unpunctured {:.4} (p = {:.2e}); \
             10 dB punctured {:.4} vs unpunctured {:.4}",
            mean(&p0),
            mean(&u0),
            low.p,
            mean(&p10),
            mean(&u10)
        ),
    )
}

fn bleu_unit() -> Outcome {
    let hand = bleu("the cat sat", "the cat", 2).map_err(|e| e.to_string())?;
    let same = bleu("the cat sat on the mat", "the cat sat on the mat", 4).map_err(|e| e.to_string())?;
    check(
        (hand - 0.60653).abs() <= 1e-5 && same == 1.0,
        format!("hand case {hand:.6}, identical {same}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let cfg = RunConfig {
            filters: vec![16, 64],
            keep_ratio: vec![0.8, 0.9],
            snr_db: vec![1.0, 4.0],
            budget: vec![SymbolBudget::Natural, SymbolBudget::PerCharacter(9.0)],
            trials: 10,
            seed: 11,
            output: dir.path().join(format!("run{run}.jsonl")),
            ..RunConfig::default()
        };
        let s = sweep(&cfg).map_err(|e| e.to_string())?;
        let jsonl = std::fs::read(&s.results).map_err(|e| e.to_string())?;
        let csv = std::fs::read(&s.aggregate).map_err(|e| e.to_string())?;
        outputs.push((jsonl, csv, s.records));
    }
    let same = outputs[0].0 == outputs[1].0 && outputs[0].1 == outputs[1].1;
    check(
        same && outputs[0].2 == 320,
        format!("{} records, {} bytes, identical: {same}", outputs[0].2, outputs[0].0.len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("algorithm-1 golden case (summer)", algorithm1_summer),
        ("spell-oracle equivalence", spell_oracle),
        ("filter-selection oracle", selection_oracle),
        ("filter-selection superiority", selection_superiority),
        ("monotonicity in M", monotone_in_m),
        ("character vs word omission", character_vs_word),
        ("PHY correctness", phy_correctness),
        ("end-to-end lossless identity", lossless_identity),
        ("low-SNR ordering", low_snr_ordering),
        ("BLEU unit", bleu_unit),
        ("determinism", determinism),
    ];
    let timed = |f: fn() -> Outcome| {
        let t = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        (r, t.elapsed())
    };
    // the first criterion has a wall-clock bound, so it runs alone
    let mut outcomes = vec![timed(criteria[0].1)];
    std::thread::scope(|s| {
        let handles: Vec<_> = criteria[1..].iter().map(|&(_, f)| s.spawn(move || timed(f))).collect();
        outcomes.extend(handles.into_iter().map(|h| h.join().expect("joined")));
    });
    let mut failed = 0;
    for ((name, _), (outcome, took)) in criteria.iter().zip(outcomes) {
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {name} [{:.1}s]: {detail}", took.as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
