import random

from feh.atm import check_program_atm, validate_derivation
from feh.gen import OP_POOL, enumerate_types, random_program, random_programs, random_terms, random_type
from feh.types import BOOL, Pure, is_comp_type


def test_enumeration_sizes():
    assert [tuple(map(len, enumerate_types(d))) for d in (1, 2, 3)] == [(2, 2), (6, 10), (62, 606)]


def test_enumeration_has_no_duplicates():
    values, comps = enumerate_types(3)
    assert len(set(values)) == len(values) and len(set(comps)) == len(comps)


def test_generated_programs_are_typable_at_bool():
    for sig, c in random_programs(5, 100, 6):
        assert set(sig.atm) <= set(OP_POOL)
        d = check_program_atm(sig, c)
        assert d is not None and d.type == Pure(BOOL) and validate_derivation(d, sig)


def test_generation_is_deterministic():
    a = random_program(random.Random(9))
    b = random_program(random.Random(9))
    assert a == b
    assert random_terms(1, 5) == random_terms(1, 5)


def test_random_types():
    rng = random.Random(0)
    for _ in range(50):
        assert is_comp_type(random_type(rng, 3, comp=True))
        assert not is_comp_type(random_type(rng, 3))
