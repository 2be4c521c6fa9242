#!/usr/bin/env python3
"""Convert the upstream LogiQA plain-text release into the JSON Lines schema
the `dagn` CLI ingests: one object per line with id, context, question,
options (4 strings) and label (0-3).

The upstream file is a sequence of 8-line blocks separated by blank lines:

    <blank>
    <answer letter a-d>
    <context>
    <question>
    A.<option> / B.<option> / C.<option> / D.<option>

Usage: convert_logiqa.py INPUT.txt OUTPUT.jsonl
"""

import json
import re
import sys


def parse_blocks(lines):
    block = []
    for line in lines:
        line = line.rstrip("\n")
        if line.strip() == "":
            if block:
                yield block
                block = []
            continue
        block.append(line.strip())
    if block:
        yield block


def strip_option_prefix(text):
    return re.sub(r"^[A-Da-d][.、:)]\s*", "", text).strip()


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    src, dst = sys.argv[1], sys.argv[2]
    count = 0
    with open(src, encoding="utf-8") as inp, open(dst, "w", encoding="utf-8") as out:
        for i, block in enumerate(parse_blocks(inp)):
            if len(block) != 7:
                sys.exit(f"block {i}: expected 7 non-empty lines, got {len(block)}")
            answer, context, question = block[0].lower(), block[1], block[2]
            if answer not in "abcd" or len(answer) != 1:
                sys.exit(f"block {i}: bad answer line {block[0]!r}")
            options = [strip_option_prefix(line) for line in block[3:7]]
            record = {
                "id": f"logiqa-{i}",
                "context": context,
                "question": question,
                "options": options,
                "label": "abcd".index(answer),
            }
            out.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    print(f"wrote {count} samples to {dst}", file=sys.stderr)


if __name__ == "__main__":
    main()
