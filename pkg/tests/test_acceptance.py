"""The acceptance matrix: one test and one printed PASS/FAIL line per
criterion.  Criterion 6 is expected to fail on the literal "exactly one
active handler" requirement for the handler-free machines; see README."""

import time

import pytest

from feh.verify import CRITERIA, format_line


@pytest.mark.parametrize("name, check", CRITERIA, ids=[name.split(" ", 1)[0] for name, _ in CRITERIA])
def test_criterion(name, check, capsys):
    start = time.perf_counter()
    ok, detail = check()
    with capsys.disabled():
        print("\n" + format_line(name, ok, detail, time.perf_counter() - start))
    assert ok, detail
