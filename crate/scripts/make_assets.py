#!/usr/bin/env python3
"""Regenerate the bundled dictionary and sample corpus.

Usage: make_assets.py <lee_background.cor> <out_dir>

The dictionary is the 10,000 most frequent purely alphabetic English words
from `wordfreq` (single letters limited to "a" and "i"), plus a short
supplement of lower-frequency words used by documented examples. Counts are
word frequencies scaled by 1e9.

The corpus is the first 500 sentences of the Lee background news corpus
(shipped in gensim's test data) that are pure 7-bit printable ASCII, contain
no '*', and have between 20 and 35 words and at most 200 characters.
"""
import re
import sys

from wordfreq import top_n_list, word_frequency

SUPPLEMENT = ["caramel", "simmer", "sumer", "bummer", "hummer"]
DICT_SIZE = 10_000


def dictionary():
    words = []
    for w in top_n_list("en", 40_000):
        if not (w.isascii() and w.isalpha() and w.islower()):
            continue
        if len(w) == 1 and w not in ("a", "i"):
            continue
        words.append(w)
        if len(words) == DICT_SIZE:
            break
    for w in SUPPLEMENT:
        if w not in words:
            words.append(w)
    return [(w, max(1, round(word_frequency(w, "en") * 1e9))) for w in words]


def sentences(path):
    text = open(path, encoding="utf-8").read()
    out, seen = [], set()
    for line in text.splitlines():
        for s in re.split(r"(?<=[.!?])\s+(?=[A-Z\"])", line.strip()):
            s = s.strip()
            if not s or s in seen:
                continue
            if any(not (32 <= ord(ch) < 127) for ch in s) or "*" in s:
                continue
            n = len(s.split())
            if 20 <= n <= 35 and len(s) <= 200:
                seen.add(s)
                out.append(s)
    return out[:500]


def main():
    src, out_dir = sys.argv[1], sys.argv[2]
    with open(f"{out_dir}/dictionary.txt", "w") as f:
        for w, c in dictionary():
            f.write(f"{w} {c}\n")
    sents = sentences(src)
    assert len(sents) == 500, len(sents)
    with open(f"{out_dir}/corpus.txt", "w") as f:
        for s in sents:
            f.write(s + "\n")


if __name__ == "__main__":
    main()
