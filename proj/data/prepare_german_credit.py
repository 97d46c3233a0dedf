#!/usr/bin/env python3
"""Convert the UCI Statlog German Credit file (german.data) into the CSV
layout used by configs/german_credit.json.

Qualitative attributes are written as their integer code within the
attribute (A11 -> 1, A410 -> 10). The combined personal-status/sex
attribute is split into `marital_status` (integer code) and `gender`
(male/female). The label `good_credit` is 1 for good and 0 for bad.

usage: prepare_german_credit.py german.data german_credit.csv
"""

import csv
import sys

COLUMNS = [
    "checking_status", "duration", "credit_history", "purpose",
    "credit_amount", "savings", "employment_since", "installment_rate",
    "personal_status", "other_debtors", "residence_since", "property",
    "age", "installment_plans", "housing", "existing_credits", "job",
    "people_liable", "telephone", "foreign_worker", "credit",
]

# attribute number for each qualitative column (codes look like A<n><k>)
QUALITATIVE = {
    "checking_status": 1, "credit_history": 3, "purpose": 4, "savings": 6,
    "employment_since": 7, "other_debtors": 10, "property": 12,
    "installment_plans": 14, "housing": 15, "job": 17, "telephone": 19,
    "foreign_worker": 20,
}

PERSONAL_STATUS = {
    "A91": ("male", 1),    # divorced/separated
    "A92": ("female", 2),  # divorced/separated/married
    "A93": ("male", 3),    # single
    "A94": ("male", 4),    # married/widowed
    "A95": ("female", 3),  # single
}


def code(value, attribute):
    prefix = "A%d" % attribute
    if not value.startswith(prefix):
        raise ValueError("unexpected code %r for attribute %d" % (value, attribute))
    return int(value[len(prefix):])


def main(src, dst):
    header = [c for c in COLUMNS if c not in ("personal_status", "credit")]
    header.insert(header.index("other_debtors"), "marital_status")
    header += ["gender", "good_credit"]
    with open(src) as fin, open(dst, "w", newline="") as fout:
        writer = csv.writer(fout, lineterminator="\n")
        writer.writerow(header)
        for line in fin:
            cells = line.split()
            if not cells:
                continue
            row = dict(zip(COLUMNS, cells))
            out = {}
            for name in COLUMNS:
                if name in QUALITATIVE:
                    out[name] = code(row[name], QUALITATIVE[name])
                elif name not in ("personal_status", "credit"):
                    out[name] = int(row[name])
            gender, marital = PERSONAL_STATUS[row["personal_status"]]
            out["marital_status"] = marital
            out["gender"] = gender
            out["good_credit"] = 1 if row["credit"] == "1" else 0
            writer.writerow([out[h] for h in header])


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
