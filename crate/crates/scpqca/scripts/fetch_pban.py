#!/usr/bin/env python3
"""Fetch the 48-case party-ban dataset (`d.pban` from the R package `cna`)
and write it as data/pban.csv.

Needs network access to CRAN and the `pyreadr` package
(`pip install pyreadr`). Columns: id (country), C, F, T, V, PB.
"""

import io
import sys
import tarfile
import tempfile
import urllib.request
from pathlib import Path

CRAN = "https://cran.r-project.org/src/contrib/"
OUT = Path(__file__).resolve().parent.parent / "data" / "pban.csv"


def latest_tarball() -> str:
    index = urllib.request.urlopen(CRAN, timeout=30).read().decode()
    names = sorted({part.split('"')[0] for part in index.split('href="cna_')[1:]})
    if not names:
        sys.exit("no cna tarball in the CRAN index")
    return "cna_" + names[-1]


def main() -> None:
    try:
        import pyreadr
    except ImportError:
        sys.exit("pyreadr is required: pip install pyreadr")
    url = CRAN + latest_tarball()
    print(f"downloading {url}", file=sys.stderr)
    blob = urllib.request.urlopen(url, timeout=60).read()
    with tarfile.open(fileobj=io.BytesIO(blob)) as tar:
        member = next((m for m in tar.getmembers() if m.name.endswith("data/d.pban.rda")), None)
        if member is None:
            sys.exit("d.pban.rda not found in the package")
        data = tar.extractfile(member).read()
    with tempfile.NamedTemporaryFile(suffix=".rda") as tmp:
        tmp.write(data)
        tmp.flush()
        frame = next(iter(pyreadr.read_r(tmp.name).values()))
    frame = frame[["C", "F", "T", "V", "PB"]].astype(int)
    frame.insert(0, "id", [str(i) for i in frame.index])
    OUT.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(OUT, index=False)
    print(f"wrote {len(frame)} cases to {OUT}", file=sys.stderr)


if __name__ == "__main__":
    main()
