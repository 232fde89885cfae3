"""One PASS/FAIL line per acceptance criterion, echoed in the pytest summary."""

RESULTS = []


def record(number: int, title: str, passed: bool, detail: str) -> bool:
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    RESULTS.append(line)
    print(line)
    return passed
