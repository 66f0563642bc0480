"""Collects one PASS/FAIL line per acceptance check for the terminal summary."""

LINES = []


def record(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    LINES.append(line)
    print(line)
    return ok
