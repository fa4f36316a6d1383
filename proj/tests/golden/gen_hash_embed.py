#!/usr/bin/env python3
"""Independent reference for the feature-hash embedder.

Writes one line per fixture text: the text as a JSON string, a tab, then the
384 float32 components as 8-digit little-endian-agnostic hex bit patterns.
"""
import json
import math
import struct
import sys

DIM = 384
MASK = (1 << 64) - 1

TEXTS = [
    "For the quarter ending 2023-03-31, Apple Inc. (AAPL) reported Revenue of 100000000 USD.",
    "What was Apple Inc.'s Revenue for the quarter ending 2023-03-31?",
    "revenue",
    "Net income rose; operating income fell.",
    "MSFT MSFT msft",
    "Café Société Générale (GLE) Assets of 1.5 USD",
    "a b c d e f g h i j k l m n o p",
    "   leading and trailing   ",
    "2023 2024 2025",
    "!!! ??? ...",
]


def fnv_fmix(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & MASK
    h ^= h >> 33
    h = (h * 0xFF51AFD7ED558CCD) & MASK
    h ^= h >> 33
    h = (h * 0xC4CEB9FE1A85EC53) & MASK
    h ^= h >> 33
    return h


def words(text: str):
    out, cur = [], bytearray()
    for b in text.encode("utf-8"):
        if ord("a") <= b <= ord("z") or ord("0") <= b <= ord("9") or b >= 0x80:
            cur.append(b)
        elif ord("A") <= b <= ord("Z"):
            cur.append(b + 32)
        elif cur:
            out.append(bytes(cur))
            cur = bytearray()
    if cur:
        out.append(bytes(cur))
    return out


def embed(text: str):
    ws = words(text)
    feats = ws + [ws[i - 1] + b" " + ws[i] for i in range(1, len(ws))]
    acc = [0.0] * DIM
    for f in feats:
        h = fnv_fmix(f)
        acc[h % DIM] += -1.0 if h >> 63 else 1.0
    norm = 0.0
    for x in acc:
        norm += x * x
    norm = math.sqrt(norm)
    scale = 1.0 / norm if norm > 0 else 1.0
    return [struct.unpack("<I", struct.pack("<f", x * scale))[0] for x in acc]


def main():
    out = sys.stdout
    for t in TEXTS:
        bits = embed(t)
        out.write(json.dumps(t) + "\t" + " ".join(f"{b:08x}" for b in bits) + "\n")


if __name__ == "__main__":
    main()
