"""Regenerates the synthetic fixture corpus under crates/core/fixtures.

Run from the repository root: python3 scripts/make_fixtures.py
"""

import random
import unicodedata
from collections import Counter
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "crates" / "core" / "fixtures"
STOPWORDS = ROOT / "crates" / "core" / "assets" / "stopwords_bn.txt"

NONE_WORDS = ["সুন্দর", "গান", "ধন্যবাদ", "খেলা", "শুভকামনা"]

TASK_1A = {
    "Abusive": ["অসভ্য", "নোংরা", "বেয়াদব", "ফালতু"],
    "Sexism": ["মেয়েমানুষ", "রান্নাঘরে", "নারীরা", "বউকে"],
    "Religious Hate": ["ধর্মের", "মন্দির", "মসজিদ", "পূজা"],
    "Political Hate": ["সরকার", "নেতা", "ভোট", "দলের"],
    "Profane": ["গাধা", "ছাগল", "বলদ", "শুয়োর"],
    "None": NONE_WORDS,
}

TASK_1B = {
    "None": NONE_WORDS,
    "Society": ["সমাজ", "দেশের", "মানুষ", "জনগণ"],
    "Organization": ["কোম্পানি", "প্রতিষ্ঠান", "ব্যাংক", "চ্যানেল"],
    "Community": ["সম্প্রদায়", "গোষ্ঠী", "জাতি", "উপজাতি"],
    "Individual": ["লোকটা", "মেয়েটা", "ছেলেটা", "ভদ্রলোক"],
}

COUNTS_1A = {
    "train": {"None": 26, "Abusive": 8, "Political Hate": 8, "Sexism": 6, "Religious Hate": 6, "Profane": 6},
    "dev": {"None": 9, "Abusive": 3, "Political Hate": 3, "Sexism": 2, "Religious Hate": 2, "Profane": 1},
    "test": {"None": 11, "Abusive": 2, "Political Hate": 2, "Sexism": 2, "Religious Hate": 2, "Profane": 1},
}

COUNTS_1B = {
    "train": {"None": 28, "Individual": 12, "Community": 7, "Society": 7, "Organization": 6},
    "dev": {"None": 10, "Individual": 4, "Community": 2, "Society": 2, "Organization": 2},
    "test": {"None": 12, "Individual": 3, "Community": 1, "Society": 2, "Organization": 2},
}

FILLER = ["ভিডিও", "আজকে", "দেখলাম", "ভাই", "কথা", "সত্যি", "খবর", "পোস্ট", "কমেন্ট", "Vai", "video"]
STOP_SAMPLE = ["আমি", "এই", "যে", "এবং", "না", "অনেক", "কি", "এটা"]
EMOJI = ["😂", "🤣", "😡", "👍", "❤️", "🙏"]
URLS = ["https://example.com/v/12", "www.example.org/post?id=7"]
PUNCT = ["।", "!", "?", "...", ",", "!!"]


def nfc(s):
    return unicodedata.normalize("NFC", s)


def load_stopwords():
    words = set()
    for line in STOPWORDS.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(nfc(line))
    return words


def make_doc(rng, label, pools, noisy):
    own = pools[label]
    words = rng.sample(own, rng.choice([1, 2]))
    if noisy:
        other = rng.choice([c for c in pools if c != label])
        words.append(rng.choice(pools[other]))
    words += rng.sample(FILLER, rng.randint(1, 3))
    words += rng.sample(STOP_SAMPLE, rng.randint(0, 2))
    rng.shuffle(words)
    parts = []
    for w in words:
        parts.append(w)
        roll = rng.random()
        if roll < 0.15:
            parts.append(rng.choice(EMOJI))
        elif roll < 0.3:
            parts[-1] = parts[-1] + rng.choice(PUNCT)
    if rng.random() < 0.2:
        parts.append(rng.choice(URLS))
    return nfc(" ".join(parts))


def content_key(text, stops):
    tokens = []
    for raw in text.split():
        tok = "".join(ch for ch in raw if unicodedata.category(ch)[0] in "LMN")
        if raw.startswith(("http", "www")) or not tok:
            continue
        tok = tok.lower()
        if tok not in stops:
            tokens.append(tok)
    return tuple(sorted(Counter(tokens).items()))


def build(task, pools, counts, id_base, seed, stops):
    rng = random.Random(seed)
    out = {}
    next_id = id_base
    for split, per_class in counts.items():
        rows = []
        seen = set()
        for label, n in per_class.items():
            made = 0
            while made < n:
                noisy = split != "train" and rng.random() < 0.2
                text = make_doc(rng, label, pools, noisy)
                key = content_key(text, stops)
                if split == "train" and key in seen:
                    continue
                seen.add(key)
                rows.append((label, text))
                made += 1
        rng.shuffle(rows)
        lines = []
        for label, text in rows:
            lines.append(f"{next_id}\t{text}\t{label}")
            next_id += 1
        out[split] = "\n".join(lines) + "\n"
    d = FIXTURES / task
    d.mkdir(parents=True, exist_ok=True)
    for split, text in out.items():
        (d / f"{split}.tsv").write_text(text, encoding="utf-8")


def main():
    stops = load_stopwords()
    build("1a", TASK_1A, COUNTS_1A, 100001, 7, stops)
    build("1b", TASK_1B, COUNTS_1B, 200001, 11, stops)
    (FIXTURES / "1b" / "schema.txt").write_text("\n".join(TASK_1B) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
