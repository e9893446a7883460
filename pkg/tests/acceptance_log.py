"""Pass/fail lines recorded by the acceptance tests, echoed at session end."""

LINES: list[str] = []


def record(number: int, passed: bool, detail: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    return line


def sort_key(line: str) -> int:
    return int(line.split(":")[0].split()[1])
