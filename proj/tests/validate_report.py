#!/usr/bin/env python3
"""Runs `occtune analyze --format json` and validates the output against the
published report schema."""

import json
import subprocess
import sys

import jsonschema


def main():
    if len(sys.argv) < 4:
        sys.exit("usage: validate_report.py OCCTUNE SCHEMA DATA_DIR")
    exe, schema_path, data = sys.argv[1:4]
    with open(schema_path) as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)

    runs = [
        ["--arch", "kepler"],
        ["--arch", "kepler", "--rule", "intensity", "--dynamic-smem", "4096"],
        ["--arch", "fermi", "--rule", "none", "--mode", "paper-literal"],
    ]
    pairs = [
        [f"{data}/atax_kepler.sass", f"{data}/atax_kepler.ptxas.txt"],
        [f"{data}/bicg_fermi.sass", f"{data}/bicg_fermi.ptxas.txt"],
    ]
    checked = 0
    for extra in runs:
        for pair in pairs:
            cmd = [exe, "analyze", *pair, *extra, "--format", "json"]
            proc = subprocess.run(cmd, capture_output=True, text=True)
            if proc.returncode != 0:
                sys.exit(f"{' '.join(cmd)} exited {proc.returncode}: {proc.stderr}")
            jsonschema.validate(json.loads(proc.stdout), schema,
                                cls=jsonschema.Draft202012Validator)
            checked += 1
    print(f"{checked} reports valid")


if __name__ == "__main__":
    main()
