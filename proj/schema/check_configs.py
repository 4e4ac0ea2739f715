"""Validate config files against config.schema.json."""
import json
import pathlib
import sys

import jsonschema


def main(argv):
    schema = json.loads(pathlib.Path(argv[1]).read_text())
    validator = jsonschema.Draft202012Validator(schema)
    failed = 0
    for name in argv[2:]:
        for path in sorted(pathlib.Path(name).glob("*.json")) if pathlib.Path(name).is_dir() else [pathlib.Path(name)]:
            errors = list(validator.iter_errors(json.loads(path.read_text())))
            for e in errors:
                print(f"{path}: {e.json_path}: {e.message}")
            failed += bool(errors)
            print(f"{'FAIL' if errors else 'ok  '} {path}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
