#!/usr/bin/env python3
"""Rebuild data/benign/benign_head.csv and data/tlds/iana_tlds.txt.

Inputs (fetch them with npm pack / pip download):
  top-sites-1.1.222.tgz              npm "top-sites"
  tlds-1.261.0.tgz                   npm "tlds"
  hstspreload-2025.1.1-py3-none-any.whl

The benign list starts with the top-sites ranking (www stripped, deduplicated)
and is padded to 40000 rows with two-label hosts from the HSTS preload list,
ordered by sha256 so the padding is stable. Free-registration TLDs that are
mostly abuse (tk, ml, ga, cf, gq) are skipped.
"""

import argparse
import ast
import hashlib
import json
import re
import tarfile
import zipfile
from pathlib import Path

ROWS = 40000
SKIP_TLDS = {"tk", "ml", "ga", "cf", "gq"}
SIMPLE = re.compile(r"[a-z0-9]([a-z0-9-]*[a-z0-9])?\.[a-z]{2,}")


def npm_json(tgz, member):
    with tarfile.open(tgz) as t:
        return json.load(t.extractfile(f"package/{member}"))


def hsts_hosts(wheel):
    with zipfile.ZipFile(wheel) as z:
        blob = z.read("hstspreload/hstspreload.bin")
        src = z.read("hstspreload/__init__.py").decode()
    table = ast.literal_eval(re.search(r"_JUMPTABLE = (\[.*?\])  # noqa", src, re.S).group(1))
    hosts = set()
    for layer in table:
        for entry in layer:
            if entry is None:
                continue
            rec = blob[entry[0]:entry[0] + entry[1]]
            while rec:
                flags, size = rec[0], rec[1]
                label, rec = rec[2:2 + size], rec[2 + size:]
                if flags & 0x80:
                    hosts.add(label.decode())
    return sorted(h for h in hosts if h.count(".") == 1 and re.fullmatch(r"[a-z0-9-]+\.[a-z]+", h))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--top-sites", required=True, type=Path)
    ap.add_argument("--tlds", required=True, type=Path)
    ap.add_argument("--hsts", required=True, type=Path)
    ap.add_argument("--data", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    args = ap.parse_args()

    seen, rows = set(), []
    for site in npm_json(args.top_sites, "top-sites.json"):
        d = site["rootDomain"].lower().removeprefix("www.")
        if SIMPLE.fullmatch(d) and d not in seen:
            seen.add(d)
            rows.append(d)
    pad = [h for h in hsts_hosts(args.hsts)
           if SIMPLE.fullmatch(h) and h.split(".")[1] not in SKIP_TLDS and h not in seen]
    pad.sort(key=lambda h: hashlib.sha256(h.encode()).hexdigest())
    rows += pad[:ROWS - len(rows)]

    (args.data / "benign").mkdir(parents=True, exist_ok=True)
    with open(args.data / "benign" / "benign_head.csv", "w") as f:
        for rank, d in enumerate(rows, 1):
            f.write(f"{rank},{d}\n")

    tlds = sorted(t for t in npm_json(args.tlds, "index.json") if re.fullmatch(r"[a-z0-9-]+", t))
    (args.data / "tlds").mkdir(parents=True, exist_ok=True)
    (args.data / "tlds" / "iana_tlds.txt").write_text("\n".join(tlds) + "\n")
    print(f"{len(rows)} benign rows, {len(tlds)} tlds")


if __name__ == "__main__":
    main()
