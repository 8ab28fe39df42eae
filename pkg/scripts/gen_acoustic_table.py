"""Regenerate the shipped synthetic raw acoustic table.

The table stands in for averaged alignment log-likelihoods.  Each phoneme gets
a small articulatory feature description; the raw entry for (true, recognized)
is the negated feature distance, inflated slightly for rarely recognized
targets so the table is directional.

    python scripts/gen_acoustic_table.py > src/pronlearn/data/acoustic_raw.csv
"""
import csv
import math
import sys

PHONEMES = (
    "aa ae ah ao aw ay b ch d dh eh er ey f g hh ih iy jh k l m n ng "
    "ow oy p r s sh t th uh uw v w y z zh"
).split()

# vowels: (backness, height, rounded, diphthong)
VOWELS = {
    "iy": (0.00, 1.00, 0, 0),
    "ih": (0.25, 0.70, 0, 0),
    "ey": (0.02, 0.80, 0, 1),
    "eh": (0.15, 0.50, 0, 0),
    "ae": (0.15, 0.20, 0, 0),
    "aa": (0.85, 0.05, 0, 0),
    "ao": (0.90, 0.30, 1, 0),
    "ah": (0.50, 0.35, 0, 0),
    "aw": (0.60, 0.15, 0, 1),
    "ay": (0.40, 0.25, 0, 1),
    "ow": (0.90, 0.55, 1, 1),
    "oy": (0.80, 0.45, 1, 1),
    "uw": (1.00, 1.00, 1, 0),
    "uh": (0.80, 0.75, 1, 0),
    "er": (0.50, 0.55, 0, 0),
}

# approximants sit between vowels and consonants: nearest vowel quality
APPROX = {"w": "uw", "y": "iy", "r": "er", "l": "ow"}

# consonants: (manner, place, voiced)
# place: 0 bilabial, 1 labiodental, 2 dental, 3 alveolar, 4 postalveolar,
# 5 palatal, 6 velar, 7 glottal
CONSONANTS = {
    "p": ("stop", 0, 0), "b": ("stop", 0, 1),
    "t": ("stop", 3, 0), "d": ("stop", 3, 1),
    "k": ("stop", 6, 0), "g": ("stop", 6, 1),
    "f": ("fric", 1, 0), "v": ("fric", 1, 1),
    "th": ("fric", 2, 0), "dh": ("fric", 2, 1),
    "s": ("fric", 3, 0), "z": ("fric", 3, 1),
    "sh": ("fric", 4, 0), "zh": ("fric", 4, 1),
    "hh": ("fric", 7, 0),
    "ch": ("affr", 4, 0), "jh": ("affr", 4, 1),
    "m": ("nasal", 0, 1), "n": ("nasal", 3, 1), "ng": ("nasal", 6, 1),
    "w": ("approx", 0, 1), "y": ("approx", 5, 1),
    "r": ("approx", 4, 1), "l": ("approx", 3, 1),
}

MANNER = {
    ("stop", "fric"): 0.75, ("stop", "affr"): 0.55, ("stop", "nasal"): 1.1,
    ("stop", "approx"): 1.4, ("fric", "affr"): 0.5, ("fric", "nasal"): 1.3,
    ("fric", "approx"): 1.3, ("affr", "nasal"): 1.3, ("affr", "approx"): 1.3,
    ("nasal", "approx"): 1.0,
}

# recognizer bias: rarely produced labels cost a little more
RARE = {"zh": 1.0, "oy": 0.8, "th": 0.6, "dh": 0.5, "uh": 0.5, "ch": 0.3,
        "jh": 0.3, "ng": 0.4, "aw": 0.3, "hh": 0.2, "y": 0.3}


def vowel_distance(a, b):
    xa, ya, ra, da = a
    xb, yb, rb, db = b
    return 2.0 * math.hypot(xa - xb, ya - yb) + 0.6 * abs(ra - rb) + 0.3 * abs(da - db)


def feature_distance(p, q):
    if p == q:
        return 0.0
    pv, qv = p in VOWELS, q in VOWELS
    if pv and qv:
        return vowel_distance(VOWELS[p], VOWELS[q])
    if pv or qv:
        v, c = (p, q) if pv else (q, p)
        if c in APPROX:
            return 1.2 + vowel_distance(VOWELS[v], VOWELS[APPROX[c]])
        return 3.0
    mp, pp, vp = CONSONANTS[p]
    mq, pq, vq = CONSONANTS[q]
    d = 0.0 if mp == mq else MANNER.get((mp, mq), MANNER.get((mq, mp)))
    return d + 0.35 * abs(pp - pq) + 0.5 * abs(vp - vq)


def raw_table():
    rows = []
    for p in PHONEMES:
        rows.append([-feature_distance(p, q) * (1.0 + 0.15 * RARE.get(q, 0.0))
                     for q in PHONEMES])
    return rows


def main(out=sys.stdout):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["true/recognized"] + PHONEMES)
    for p, row in zip(PHONEMES, raw_table()):
        writer.writerow([p] + ["%.6f" % v for v in row])


if __name__ == "__main__":
    main()
