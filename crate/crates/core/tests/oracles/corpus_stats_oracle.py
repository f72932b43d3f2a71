"""Brute-force corpus statistics for the five-set fixture.

Deliberately naive: every n-gram is built by explicit index loops and
collected into a list, duplicates removed by pairwise comparison.
Usage: python3 corpus_stats_oracle.py <set files...> --abstract A --concrete C
"""
import sys
from fractions import Fraction


def read_lexicon(path):
    words = []
    for raw in open(path, encoding="utf-8"):
        w = raw.strip()
        if w and not w.startswith("#"):
            words.append(w)
    return words


def analyse(text):
    lines = []
    sections = 0
    in_section = False
    for raw in text.replace("\r\n", "\n").split("\n"):
        if raw.strip() == "":
            in_section = False
            continue
        if not in_section:
            sections += 1
            in_section = True
        lines.append([t.lower() for t in raw.split()])
    return lines, sections


def distinct(items):
    seen = []
    for it in items:
        if not any(it == s for s in seen):
            seen.append(it)
    return seen


def main(argv):
    files, abstract, concrete = [], None, None
    i = 0
    while i < len(argv):
        if argv[i] == "--abstract":
            abstract = read_lexicon(argv[i + 1]); i += 2
        elif argv[i] == "--concrete":
            concrete = read_lexicon(argv[i + 1]); i += 2
        else:
            files.append(argv[i]); i += 1

    docs = [analyse(open(f, encoding="utf-8", newline="").read()) for f in files]
    words = lines = sections = 0
    grams = {1: [], 2: [], 3: []}
    stream = []
    for doc_lines, doc_sections in docs:
        sections += doc_sections
        lines += len(doc_lines)
        for toks in doc_lines:
            words += len(toks)
            stream.extend(toks)
            for n in (1, 2, 3):
                for start in range(0, len(toks) - n + 1):
                    grams[n].append(tuple(toks[start:start + n]))

    n_docs = len(docs)
    abs_hits = sum(1 for t in stream if t in abstract)
    con_hits = sum(1 for t in stream if t in concrete)
    out = [
        ("lyric_sets", n_docs),
        ("avg_words", Fraction(words, n_docs)),
        ("avg_lines", Fraction(lines, n_docs)),
        ("avg_sections", Fraction(sections, n_docs)),
        ("unique_unigrams", len(distinct(grams[1]))),
        ("unique_bigrams", len(distinct(grams[2]))),
        ("unique_trigrams", len(distinct(grams[3]))),
        ("abstract_ratio", Fraction(100 * abs_hits, len(stream))),
        ("concrete_ratio", Fraction(100 * con_hits, len(stream))),
    ]
    for key, value in out:
        if isinstance(value, Fraction):
            print(f"{key}\t{value.numerator}/{value.denominator}\t{float(value)!r}")
        else:
            print(f"{key}\t{value}")


if __name__ == "__main__":
    main(sys.argv[1:])
