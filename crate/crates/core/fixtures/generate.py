#!/usr/bin/env python3
"""Regenerate the bundled fixture: python3 generate.py (writes next to itself).

Cases follow k_t = k_{t-1} * exp((R_t - 1) / 7) with Poisson noise; tweet
volume tracks cases five days ahead. Tweet and labeled-topic words come from
seven category vocabularies.
"""

import csv
import json
import math
import os
import random
import unicodedata
from datetime import date, timedelta

HERE = os.path.dirname(os.path.abspath(__file__))
START = date(2020, 2, 1)
END = date(2020, 6, 30)
SI = 7.0
LEAD = 5

rng = random.Random(20200301)


def days(a, b):
    d = a
    while d <= b:
        yield d
        d += timedelta(days=1)


def poisson(lam):
    if lam <= 0:
        return 0
    if lam < 30:
        l, k, p = math.exp(-lam), 0, 1.0
        while True:
            p *= rng.random()
            if p <= l:
                return k
            k += 1
    return max(0, int(round(rng.gauss(lam, math.sqrt(lam)))))


def curve(first_case, phases, k0=1.0):
    """Expected daily cases; phases is [(last_day, R)], the last R runs to END."""
    out, k = {}, 0.0
    for d in days(START, END):
        if d < first_case:
            out[d] = 0.0
            continue
        if d == first_case:
            k = k0
        else:
            r = next((r for last, r in phases if d <= last), phases[-1][1])
            k *= math.exp((r - 1.0) / SI)
        out[d] = k
    return out


GR_CURVE = curve(date(2020, 2, 27), [(date(2020, 3, 17), 3.2), (date(2020, 3, 28), 1.7), (END, 0.7)])
NATIONAL = {
    "France": curve(date(2020, 2, 24), [(date(2020, 3, 19), 3.0), (date(2020, 3, 30), 1.6), (END, 0.72)], 4.0),
    "Belgium": curve(date(2020, 3, 1), [(date(2020, 3, 18), 3.1), (date(2020, 3, 29), 1.5), (END, 0.75)], 1.0),
    "Germany": curve(date(2020, 2, 26), [(date(2020, 3, 16), 3.0), (date(2020, 3, 27), 1.5), (END, 0.7)], 3.0),
}
MEMBERS = [
    ("Lorraine, France", 0.35),
    ("Luxembourg", 0.10),
    ("Saarland, Germany", 0.12),
    ("Rhineland-Palatinate, Germany", 0.23),
    ("Wallonia, Belgium", 0.20),
]


def write_cases():
    rows = []
    for d in days(START, END):
        for member, share in MEMBERS:
            n = poisson(GR_CURVE[d] * share)
            if n or GR_CURVE[d] > 0:
                rows.append((d, member, n, poisson(n * 0.03)))
        for country, c in NATIONAL.items():
            n = poisson(c[d])
            if country == "France" and d == date(2020, 6, 3):
                n = -266  # data revision
            if n or c[d] > 0:
                rows.append((d, country, n, poisson(max(n, 0) * 0.04)))
    with open(os.path.join(HERE, "cases.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["date", "region", "new_cases", "deaths"])
        for d, r, n, dd in rows:
            w.writerow([d.isoformat(), r, n, dd])


GAZETTEER = [
    ("moselle", "Moselle, Lorraine, France", 1),
    ("metz", "Metz, Moselle, Lorraine, France", 1),
    ("nancy", "Nancy, Meurthe-et-Moselle, Lorraine, France", 1),
    ("lorraine", "Lorraine, France", 1),
    ("luxembourg", "Luxembourg", 2),
    ("esch sur alzette", "Esch-sur-Alzette, Luxembourg", 1),
    ("saarbrucken", "Saarbrucken, Saarland, Germany", 1),
    ("saarland", "Saarland, Germany", 1),
    ("trier", "Trier, Rhineland-Palatinate, Germany", 1),
    ("mainz", "Mainz, Rhineland-Palatinate, Germany", 1),
    ("rheinland pfalz", "Rhineland-Palatinate, Germany", 1),
    ("liege", "Liege, Wallonia, Belgium", 1),
    ("namur", "Namur, Wallonia, Belgium", 1),
    ("wallonie", "Wallonia, Belgium", 1),
    ("paris", "Paris, Ile-de-France, France", 1),
    ("lyon", "Lyon, Auvergne-Rhone-Alpes, France", 1),
    ("berlin", "Berlin, Germany", 1),
    ("munchen", "Munich, Bavaria, Germany", 1),
    ("brussels", "Brussels, Belgium", 1),
    ("bruxelles", "Brussels, Belgium", 1),
    ("antwerpen", "Antwerp, Flanders, Belgium", 1),
    ("france", "France", 0),
    ("germany", "Germany", 0),
    ("deutschland", "Germany", 0),
    ("belgium", "Belgium", 0),
    ("belgique", "Belgium", 0),
]

REGIONS = [
    {"name": "GR", "members": [m for m, _ in MEMBERS]},
    {"name": "Luxembourg", "members": ["Luxembourg"]},
    {"name": "Belgium", "members": ["Belgium"]},
    {"name": "France", "members": ["France"]},
    {"name": "Germany", "members": ["Germany"]},
]

# free-text user locations per place, with the language tweets there use
GR_PLACES = [
    (["Metz, France", "Moselle", "Nancy", "Lorraine"], "fr", 0.35),
    (["Luxembourg", "Esch-sur-Alzette", "luxembourg"], "fr", 0.10),
    (["Saarbrücken", "Saarland"], "de", 0.12),
    (["Trier", "Mainz", "Rheinland-Pfalz"], "de", 0.23),
    (["Liège", "Namur", "Wallonie"], "fr", 0.20),
]
OTHER_PLACES = {
    "France": (["Paris", "Lyon", "France"], "fr"),
    "Germany": (["Berlin", "München", "Deutschland"], "de"),
    "Belgium": (["Bruxelles", "Antwerpen", "Belgique"], "fr"),
}

VOCAB = {
    1: "wuhan china chinese beijing hubei outbreak origin market quarantine province wuhanvirus travel lab seafood",
    2: "symptoms mask masks fever cough hands wash distancing vaccine treatment hospital test testing protect",
    3: "cases deaths confirmed hospitalized icu dead count update reported figures local today patients toll",
    4: "italy spain iran usa trump global pandemic who international world worldwide abroad europe borders",
    5: "lockdown confinement schools closed shops homeoffice curfew rules ban gatherings stay home closure restaurants",
    6: "racism racist discrimination asian xenophobia hate insult attacked stigma prejudice minorities",
    7: "netflix music football cat weather coffee recipe bored game series birthday garden",
}
VOCAB = {k: v.split() for k, v in VOCAB.items()}
GENERIC = "people time day news week new situation crisis everyone health".split()
FILLER = {
    "en": "the and is of to in this it we".split(),
    "fr": "le la les et est des une pour nous".split(),
    "de": "der die das und ist nicht wir mit auch".split(),
}
KEYWORDS = ["covid", "coronavirus", "corona", "covid-19"]


def category_weights(d):
    early = d < date(2020, 3, 10)
    late = d > date(2020, 4, 10)
    w = {1: 5 if early else 1.5, 2: 3, 3: 3, 4: 2.5, 5: 1 if early else 4, 6: 0.8 if early else 0.4, 7: 1.2 if late else 0.8}
    return list(w.keys()), list(w.values())


def tweet_text(d, lang):
    cats, weights = category_weights(d)
    c = rng.choices(cats, weights)[0]
    words = rng.sample(VOCAB[c], rng.randint(4, 7))
    words += rng.sample(GENERIC, rng.randint(0, 2))
    words += rng.sample(FILLER[lang], rng.randint(2, 4))
    words.insert(rng.randrange(len(words) + 1), rng.choice(KEYWORDS))
    rng.shuffle(words)
    if rng.random() < 0.4:
        words.append("#" + rng.choice(VOCAB[c]))
    if rng.random() < 0.2:
        words.insert(0, "@user%d" % rng.randint(1, 99))
    if rng.random() < 0.15:
        words.append("https://t.co/%06d" % rng.randint(0, 999999))
    return " ".join(words)


def canonical(raw):
    folded = unicodedata.normalize("NFKD", raw.lower())
    folded = "".join(ch for ch in folded if not unicodedata.combining(ch)).replace("-", " ")
    keys = [folded.strip()] + [t.strip() for t in folded.split(",")]
    hits = [(len(p), pr, c) for p, c, pr in GAZETTEER if p in keys]
    return max(hits)[2] if hits else None


def smoothed(series, d):
    vals = [series.get(d + timedelta(days=o), 0.0) for o in range(-3, 4)]
    return sum(vals) / len(vals)


def write_tweets():
    gr_peak = max(GR_CURVE.values())
    lines = []
    next_id = [1240000000000000000]
    users = {}

    def emit(d, originals, lang, with_geo):
        original = rng.choice(originals)
        uid = users.setdefault((original, rng.randint(0, 40)), "u%d" % (900000 + len(users)))
        rec = {
            "tweet_id": str(next_id[0]),
            "full_text": tweet_text(d, lang),
            "user_id": uid,
            "user_geo_original": original,
            "date": d.isoformat(),
        }
        next_id[0] += rng.randint(1, 5000)
        if with_geo:
            rec["user_geo"] = canonical(original)
        lines.append(json.dumps(rec, ensure_ascii=False))

    for d in days(START, END):
        ahead = d + timedelta(days=LEAD)
        lam = 2.0 + 70.0 * smoothed(GR_CURVE, ahead) / gr_peak
        for _ in range(poisson(lam)):
            places, lang, _ = rng.choices(GR_PLACES, [p[2] for p in GR_PLACES])[0]
            emit(d, places, lang, rng.random() < 0.3)
        for country, (places, lang) in OTHER_PLACES.items():
            c = NATIONAL[country]
            lam = 1.0 + 18.0 * smoothed(c, ahead) / max(c.values())
            for _ in range(poisson(lam)):
                emit(d, places, lang, False)
        if d.day == 15:
            emit(d, ["Atlantis-99", "somewhere over the rainbow", ""], "en", False)

    # dataset noise: a duplicate id, out-of-window dates, a truncated line
    lines.insert(40, lines[39])
    oow = json.loads(lines[10])
    oow["tweet_id"], oow["date"] = "1239999999999999999", "2020-01-15"
    lines.insert(11, json.dumps(oow, ensure_ascii=False))
    lines.insert(200, lines[199][: len(lines[199]) // 2])
    with open(os.path.join(HERE, "tweets.jsonl"), "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


COUNTS = {1: 70, 2: 62, 3: 55, 4: 50, 5: 48, 6: 30, 7: 35}
COUNTRIES = ["GR", "Luxembourg", "Belgium", "France", "Germany"]


def write_labeled_topics():
    rows = []
    for c, n in COUNTS.items():
        for _ in range(n):
            words = rng.sample(VOCAB[c], rng.randint(2, 5))
            others = [o for o in VOCAB if o != c]
            for _ in range(rng.randint(2, 4)):
                words.append(rng.choice(VOCAB[rng.choice(others)]))
            words += rng.sample(GENERIC, 10 - len(words))
            rng.shuffle(words)
            rows.append((" ".join(words), rng.choice(COUNTRIES), c))
    rng.shuffle(rows)
    with open(os.path.join(HERE, "labeled_topics.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["top_words", "country", "category"])
        w.writerows(rows)


def main():
    write_cases()
    write_tweets()
    write_labeled_topics()
    with open(os.path.join(HERE, "gazetteer.tsv"), "w", newline="") as f:
        f.write("pattern\tcanonical\tpriority\n")
        for p, c, pr in GAZETTEER:
            f.write("%s\t%s\t%d\n" % (p, c, pr))
    with open(os.path.join(HERE, "regions.json"), "w") as f:
        json.dump(REGIONS, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
