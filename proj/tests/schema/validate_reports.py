"""Validate report JSON files against docs/report.schema.json."""

import json
import sys

import jsonschema


def main() -> int:
    schema_path, *reports = sys.argv[1:]
    with open(schema_path) as fh:
        schema = json.load(fh)
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failed = 0
    for path in reports:
        with open(path) as fh:
            report = json.load(fh)
        errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
        for err in errors:
            print(f"{path}: {'/'.join(map(str, err.path))}: {err.message}")
        failed += bool(errors)
        if not errors:
            print(f"{path}: valid")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
