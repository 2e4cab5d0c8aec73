#!/usr/bin/env python3
"""Regenerates include/bclearer/unicode_data.inc from the Python unicodedata
module. Run manually when bumping the Unicode version; the output is committed."""
import sys
import unicodedata

HANGUL_S_BASE = 0xAC00
HANGUL_S_COUNT = 11172


def is_hangul_syllable(cp):
    return HANGUL_S_BASE <= cp < HANGUL_S_BASE + HANGUL_S_COUNT


def main(out_path):
    max_cp = 0x110000

    # Full canonical decompositions (NFD), excluding algorithmic Hangul.
    decomp = {}
    for cp in range(max_cp):
        if is_hangul_syllable(cp):
            continue
        ch = chr(cp)
        nfd = unicodedata.normalize("NFD", ch)
        if nfd != ch:
            decomp[cp] = [ord(c) for c in nfd]

    # Non-zero canonical combining classes.
    ccc = {}
    for cp in range(max_cp):
        c = unicodedata.combining(chr(cp))
        if c:
            ccc[cp] = c

    # Primary composites: pairs (starter, combining) -> composed, derived by
    # checking NFC against the raw canonical pair decomposition. This bakes in
    # the composition exclusions without reading CompositionExclusions.txt.
    comp = {}
    for cp in range(max_cp):
        if is_hangul_syllable(cp):
            continue
        raw = unicodedata.decomposition(chr(cp))
        if not raw or raw.startswith("<"):
            continue
        parts = raw.split()
        if len(parts) != 2:
            continue
        a, b = int(parts[0], 16), int(parts[1], 16)
        if unicodedata.combining(chr(a)) != 0:
            continue
        if unicodedata.normalize("NFC", chr(a) + chr(b)) == chr(cp):
            comp[(a, b)] = cp

    flat = []
    decomp_index = []  # (cp, offset, len)
    for cp in sorted(decomp):
        seq = decomp[cp]
        decomp_index.append((cp, len(flat), len(seq)))
        flat.extend(seq)

    with open(out_path, "w") as f:
        w = f.write
        w("// Generated by scripts/gen_unicode_tables.py from Python unicodedata\n")
        w("// (Unicode %s). Do not edit by hand.\n\n" % unicodedata.unidata_version)

        w("inline constexpr char32_t kDecompFlat[] = {\n")
        for i in range(0, len(flat), 12):
            w("    " + ",".join("0x%X" % v for v in flat[i:i + 12]) + ",\n")
        w("};\n\n")

        w("struct DecompEntry { char32_t cp; uint32_t offset; uint32_t len; };\n")
        w("inline constexpr DecompEntry kDecompIndex[] = {\n")
        for cp, off, ln in decomp_index:
            w("    {0x%X,%d,%d},\n" % (cp, off, ln))
        w("};\n\n")

        w("struct CccEntry { char32_t cp; uint8_t ccc; };\n")
        w("inline constexpr CccEntry kCombiningClass[] = {\n")
        items = sorted(ccc.items())
        for i in range(0, len(items), 8):
            w("    " + "".join("{0x%X,%d}," % kv for kv in items[i:i + 8]) + "\n")
        w("};\n\n")

        w("struct CompEntry { char32_t first; char32_t second; char32_t composed; };\n")
        w("inline constexpr CompEntry kComposition[] = {\n")
        for (a, b), c in sorted(comp.items()):
            w("    {0x%X,0x%X,0x%X},\n" % (a, b, c))
        w("};\n")

    sys.stderr.write(
        "decomp entries: %d (flat %d), ccc: %d, comp: %d\n"
        % (len(decomp_index), len(flat), len(ccc), len(comp)))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "include/bclearer/unicode_data.inc")
