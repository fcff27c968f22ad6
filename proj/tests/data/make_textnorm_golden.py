#!/usr/bin/env python3
"""Regenerates textnorm_golden.jsonl from a standalone Python model of the
normalization rules. Run from this directory."""

import json
import random
import unicodedata

ATMOSPHERICS = ["[laughter]", "[laughs]", "(laughter)", "(laughs)", "<laughter>", "[silence]",
                "(silence)", "<silence>", "[noise]", "(noise)", "<noise>", "[music]", "(music)",
                "[inaudible]", "(inaudible)", "[crosstalk]", "[applause]", "[cough]", "(cough)",
                "<sil>", "[blank_audio]"]

UNITS = {w: i for i, w in enumerate(
    "one two three four five six seven eight nine".split(), start=1)}
TEENS = {w: i for i, w in enumerate(
    "ten eleven twelve thirteen fourteen fifteen sixteen seventeen eighteen nineteen".split(), start=10)}
TENS = {w: 10 * i for i, w in enumerate(
    "twenty thirty forty fifty sixty seventy eighty ninety".split(), start=2)}
SCALES = {"thousand": 10**3, "million": 10**6, "billion": 10**9}


def strip(text):
    markers = sorted(ATMOSPHERICS, key=len, reverse=True)
    out, i, low = [], 0, text.lower()
    while i < len(text):
        for m in markers:
            if low.startswith(m, i):
                i += len(m)
                break
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def fold_char(ch):
    if ord(ch) < 128:
        return ch.lower() if ch.isalnum() else " "
    if 0xC0 <= ord(ch) <= 0xFF:
        if ch == "ß":
            return "s"
        if ch in "ÐðÞþ×÷":
            return {"Ð": "d", "ð": "d"}.get(ch, " ")
        base = unicodedata.normalize("NFD", ch)[0]
        if base.isascii() and base.isalpha():
            return base.lower()
        if ch == "Ø" or ch == "ø":
            return "o"
        if ch == "Æ" or ch == "æ":
            return "a"
        return " "
    return " "


def basic(text):
    return " ".join("".join(fold_char(c) for c in text).split())


def small(toks, i):
    if i >= len(toks):
        return None
    w = toks[i]
    if w in TENS:
        if i + 1 < len(toks) and toks[i + 1] in UNITS:
            return TENS[w] + UNITS[toks[i + 1]], 2
        return TENS[w], 1
    if w in TEENS:
        return TEENS[w], 1
    if w in UNITS:
        return UNITS[w], 1
    return None


def chunk(toks, i):
    head = small(toks, i)
    if head is None:
        return None
    value, n = head
    j = i + n
    if value < 20 and j < len(toks) and toks[j] == "hundred":
        value *= 100
        end = j + 1
        k = end
        if k < len(toks) and toks[k] == "and" and small(toks, k + 1):
            k += 1
        rest = small(toks, k)
        if rest:
            value += rest[0]
            end = k + rest[1]
        return value, end - i
    return head


def number(toks, i):
    if toks[i] == "zero":
        return 0, 1
    total, last, pos, done = 0, float("inf"), i, i
    while True:
        c = chunk(toks, pos)
        if c is None:
            break
        after = pos + c[1]
        scale = SCALES.get(toks[after]) if after < len(toks) else None
        if scale is not None and scale < last:
            total += c[0] * scale
            last = scale
            pos = done = after + 1
            if pos < len(toks) and toks[pos] == "and" and chunk(toks, pos + 1):
                pos += 1
            continue
        if scale is None:
            total += c[0]
            done = after
        break
    if done == i:
        return None
    return total, done - i


def numbers(text):
    toks, out, i = text.split(), [], 0
    while i < len(toks):
        r = number(toks, i)
        if r:
            out.append(str(r[0]))
            i += r[1]
        else:
            out.append(toks[i])
            i += 1
    return " ".join(out)


def normalize(text):
    return numbers(basic(strip(text)))


def words(n):
    u = "zero one two three four five six seven eight nine ten eleven twelve thirteen fourteen " \
        "fifteen sixteen seventeen eighteen nineteen".split()
    t = "_ _ twenty thirty forty fifty sixty seventy eighty ninety".split()

    def lt1000(v, use_and):
        parts = []
        if v >= 100:
            parts += [u[v // 100], "hundred"]
            v %= 100
            if v and use_and:
                parts.append("and")
        if v >= 20:
            parts.append(t[v // 10])
            if v % 10:
                parts.append(u[v % 10])
        elif v:
            parts.append(u[v])
        return parts

    if n == 0:
        return "zero"
    parts, use_and = [], random.random() < 0.5
    for value, name in ((10**9, "billion"), (10**6, "million"), (10**3, "thousand")):
        if n >= value:
            parts += lt1000(n // value, use_and) + [name]
            n %= value
    parts += lt1000(n, use_and)
    return " ".join(parts)


def main():
    random.seed(20240314)
    cases = []

    fixed_normalize = [
        "How are you?", "  Hello,   WORLD!! ", "", "How are <um> you?", "Twenty-one!",
        "one hundred twenty three", "i have two dogs", "hundred", "[laughter] how are you",
        "(silence)", "how [noise] are you", "[LAUGHTER] Ha", "[laughter][noise]", "<sil> <sil>",
        "It's 5 o'clock.", "Don't stop--believing", "e-mail me @ home", "C'est déjà vu",
        "Ærøskøbing", "naïve café", "Straße", "Þorn and ×", "Über façade", "El Niño",
        "one thousand and five", "one thousand and", "one hundred and", "two thousand three hundred",
        "nineteen ninety nine", "twenty twenty", "one million one thousand", "five thousand million",
        "one thousand two thousand", "zero zero", "zero hundred", "twenty one hundred",
        "ten hundred", "fifteen hundred and six", "a hundred dogs", "thousand", "and", "and one",
        "three hundred thousand two", "one million million", "ninety", "ninety nine bottles",
        "forty-two is the answer", "The year two thousand and twenty four.",
        "seven eight nine", "eleven twelve", "sixty sixty six", "billion dollars",
        "two billion three million four thousand five hundred and six",
        "Call 911 now", "Room 101, floor two", "[music] la la [music]", "(cough) sorry (COUGH)",
        "[blank_audio]", "[crosstalk] no [inaudible] yes", "<laughter>ha<laughter>",
        "Tab\tseparated\ttext", "Line\nbreaks\r\nhere", "emoji 😀 test", "中文 and english",
        "one\ttwo", "UPPER lower MiXeD", "!!!", "...", "a.b.c", "x_y_z", "under_score",
        "percent 50%", "$100 bill", "3.14 pi", "1,000 people", "#hashtag", "quote \"this\"",
        "[laughter", "laughter]", "(silence", "<noise", "[Laughs] ok", "(Laughs) ok",
        "one two three four five", "eight hundred eighty eight", "nine thousand nine hundred ninety nine",
        "thirteen thousand", "twelve hundred", "seventy thousand and one",
        "one hundred and one dalmatians", "four score and seven years",
    ]
    for s in fixed_normalize:
        cases.append(("normalize", s, normalize(s)))

    fixed_basic = ["How are you?", "  Hello,   WORLD!! ", "", "ÀÉÎÕÜ", "ñ ç ø å æ", "A--B", "¿Qué?",
                   "twenty-one", "[laughter]", "mixed 123 ABC"]
    for s in fixed_basic:
        cases.append(("basic_normalize", s, basic(s)))

    fixed_numbers = ["one hundred twenty three", "i have two dogs", "hundred", "zero", "and",
                     "one and two", "two hundred and", "eighty eight keys", "sixty thousand million"]
    for s in fixed_numbers:
        cases.append(("normalize_numbers", s, numbers(s)))

    fixed_strip = ["[laughter] how are you", "(silence)", "how [noise] are you", "[NOISE]x",
                   "a [music] b (music) c", "no markers"]
    for s in fixed_strip:
        cases.append(("strip_atmospherics", s, strip(s)))

    vocab = "the cat sat on mat we went home today very cold quick brown fox".split()
    while len(cases) < 200:
        n = random.choice([random.randint(0, 99), random.randint(100, 9999),
                           random.randint(10000, 999999), random.randint(10**6, 2 * 10**9)])
        left = " ".join(random.sample(vocab, random.randint(0, 3)))
        right = " ".join(random.sample(vocab, random.randint(0, 3)))
        text = " ".join(x for x in (left.capitalize(), words(n), right) if x)
        if random.random() < 0.3:
            text = text.replace(" ", "-", 1)
        if random.random() < 0.3:
            text += random.choice(["!", "?", ".", "..."])
        if random.random() < 0.2:
            text = random.choice(ATMOSPHERICS) + " " + text
        cases.append(("normalize", text, normalize(text)))

    with open("textnorm_golden.jsonl", "w", encoding="utf-8") as f:
        for fn, inp, exp in cases:
            f.write(json.dumps({"fn": fn, "input": inp, "expected": exp}, ensure_ascii=False) + "\n")
    print(f"wrote {len(cases)} cases")


if __name__ == "__main__":
    main()
