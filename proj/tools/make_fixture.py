#!/usr/bin/env python3
"""Regenerate data/fixture/corpus.jsonl and features.csv (deterministic)."""
import json
import pathlib
import random

THEMES = {
    "battle": "battle steel sword blood war warrior shield march glory victory fight army spear banner honor fallen king iron charge enemy triumph",
    "death": "death corpse flesh grave rot bones bodies decay dead skin blood torture gore bleeding buried worms morgue dying skull pain",
    "occult": "thee thou thy shall upon behold forth serpent ancient ritual altar candle spell witch moon curse dark temple unholy secret",
    "love": "love heart baby kiss tender dream girl lonely night together hold touch forever smile tears arms sweet promise want feel",
    "nature": "mountains river forest winds snow frozen journey sky land storm sea wolves flying eagle north stone valley shore sun wild",
    "dystopia": "machine human race disease destruction mass earth destroy breed seed world nuclear system control future plague ruin slaves cities masses",
}
FILLER = "the and of we in to is it my you our from with all on they are this will be for as at not no by".split()
META = [
    "Recorded at Blackwater Studio, 1994",
    "Mixed by J. Smith",
    "Arrangement by the band",
    "Band photos by K. Lind",
    "Mastered at Fjord Sound",
]
BANDS = [
    ("Iron Vale", [("Steel Dawn", 1991), ("Northern Shields", 1994)]),
    ("Grave Hymn", [("Rot Within", 1993), ("Mortuary Psalms", 1996)]),
    ("Candle Coven", [("Sabbath Lights", 1995)]),
    ("Machine Prophet", [("Null Cities", 1998), ("Seed of Ruin", 2001)]),
    ("Velvet Hollow", [("Tender Nights", 1999)]),
]
BAND_THEMES = {
    "Iron Vale": ["battle", "nature"],
    "Grave Hymn": ["death", "occult"],
    "Candle Coven": ["occult", "death"],
    "Machine Prophet": ["dystopia", "battle"],
    "Velvet Hollow": ["love", "nature"],
}


def main() -> None:
    rng = random.Random(20240817)
    root = pathlib.Path(__file__).resolve().parent.parent / "data" / "fixture"
    root.mkdir(parents=True, exist_ok=True)
    albums = [(band, album, year) for band, alist in BANDS for album, year in alist]
    docs, features = [], []
    for i in range(60):
        band, album, year = albums[i % len(albums)]
        primary, secondary = BAND_THEMES[band]
        share = rng.uniform(0.55, 0.9)
        lines = []
        for _ in range(rng.randint(5, 9)):
            words = []
            for _ in range(rng.randint(5, 9)):
                r = rng.random()
                if r < 0.3:
                    words.append(rng.choice(FILLER))
                else:
                    theme = primary if rng.random() < share else secondary
                    words.append(rng.choice(THEMES[theme].split()))
            line = " ".join(words)
            lines.append(line[0].upper() + line[1:])
        if i % 3 == 0:
            lines.insert(0, rng.choice(META))
        if i % 7 == 0:
            lines.append(rng.choice(META))
        doc_id = f"song-{i + 1:03d}"
        docs.append({"id": doc_id, "band": band, "album": album, "title": f"Track {i // len(albums) + 1}",
                     "year": year, "text": "\n".join(lines)})
        hard = {"battle": 0.7, "death": 0.9, "occult": 0.6, "love": 0.1, "nature": 0.4, "dystopia": 0.8}
        dark = {"battle": 0.4, "death": 0.8, "occult": 0.9, "love": 0.2, "nature": 0.3, "dystopia": 0.7}
        h = share * hard[primary] + (1 - share) * hard[secondary] + rng.gauss(0, 0.05)
        d = share * dark[primary] + (1 - share) * dark[secondary] + rng.gauss(0, 0.05)
        features.append((doc_id, h, d))
    with open(root / "corpus.jsonl", "w", encoding="utf-8") as f:
        for doc in docs:
            f.write(json.dumps(doc, ensure_ascii=False) + "\n")
    with open(root / "features.csv", "w", encoding="utf-8") as f:
        f.write("id,hardness,darkness\n")
        for doc_id, h, d in features:
            f.write(f"{doc_id},{h:.6f},{d:.6f}\n")


if __name__ == "__main__":
    main()
