"""Smoke test for the lyrecon Python extension.

Build the module and run this script with it on the path:

    cargo build -p lyrecon-py --release --features extension-module
    cp target/release/liblyrecon.so python/lyrecon.so
    python3 python/smoke_test.py
"""
import math

import lyrecon


def main():
    theta = lyrecon.mood_angle(-1.05, 0.34)
    assert abs(theta / math.pi - 0.90) <= 0.005, theta
    table = lyrecon.MoodTable()
    assert len(table) == 8
    assert table.label(theta) == "sad"
    assert table.label(0.0) == "happy"

    prompt = lyrecon.build_prompt(
        "TRSEKGD128F42B654D",
        "Muse",
        "Time Is Running Out",
        ["Experimental"],
        ["time", "out", "run"],
        valence=-1.05,
        arousal=0.34,
    )
    assert prompt.text == (
        "Compose Experimental lyrics, in a style reminiscent of Muse which represents "
        "a sad mood under the title of Time Is Running Out using the following "
        "vocabulary time, out, run."
    ), prompt.text
    assert prompt.fields()["mood"] == "sad"

    lyrics = lyrecon.mock_generate(prompt)
    assert lyrics == lyrecon.mock_generate(prompt)
    doc = lyrecon.segment(lyrics)
    assert len(doc.sections) >= 2
    assert set(doc.tokens) >= {"time", "out", "run"}

    assert lyrecon.tokenize("Hello  World") == ["hello", "world"]
    assert lyrecon.ngrams(["a", "b", "c"], 2) == [("a", "b"), ("b", "c")]
    assert [lyrecon.stem(w) for w in ("caresses", "ponies", "sky")] == ["caress", "poni", "sky"]
    assert abs(lyrecon.lexicon_ratio(["love", "war", "love"], ["love"]) - 200 / 3) < 1e-9

    stats = lyrecon.corpus_stats(["a b\nb c"], ["a"], ["c"])
    assert stats["avg_words_per_set"] == 4
    assert stats["unique_bigrams"] == 2
    assert stats["unique_trigrams"] == 0

    corpus = lyrecon.parse_bow("# c\n%run,time,out\nTR1,1,1:2,2:5,3:1\n")
    assert corpus.track_ids == ["TR1"]
    assert corpus.ordered_vocabulary("TR1") == ["time", "run", "out"]
    assert corpus.counts("TR1") == {"run": 2, "time": 5, "out": 1}
    assert corpus.serialize() == "%run,time,out\nTR1,1,1:2,2:5,3:1\n"
    assert corpus.coverage("TR1", "running out of time") == 1.0

    try:
        lyrecon.mood_angle(0.0, 0.0)
    except lyrecon.LyreconError as e:
        assert isinstance(e, ValueError)
    else:
        raise AssertionError("zero mood vector accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
