from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustpop.poly import Polynomial
from robustpop.problems import motzkin
from robustpop.relax import MomentProblem, SdpInstance, build_nominal, build_priority_psd
from robustpop.sdpa import SdpaFormatError, dumps_sdpa, export_sdpa, import_sdpa, loads_sdpa


def test_single_entry_instance_is_five_lines():
    sdp = SdpInstance((1,), (Fraction(1),), ({}, {(0, 0, 0): Fraction(1)}))
    text = dumps_sdpa(sdp)
    assert text.splitlines() == ["1", "1", "1", "1", "1 1 1 1 1"]


def test_round_trip_motzkin_pairs(tmp_path):
    for j in (3, 8):
        for sdp in build_nominal(MomentProblem(motzkin(), order=j)):
            path = tmp_path / f"m{j}.dat-s"
            export_sdpa(sdp, path)
            back = import_sdpa(path)
            assert back.same_as(sdp)
            assert back.tag is sdp.tag


def test_motzkin_order_eight_primal_block_line():
    text = dumps_sdpa(build_nominal(MomentProblem(motzkin(), order=8))[0])
    body = [ln for ln in text.splitlines() if not ln.startswith("*")]
    assert body[1] == "1" and body[2] == "45"


def test_export_is_deterministic():
    mp = MomentProblem(motzkin(), order=4, eps=Fraction(1, 100))
    a, b = build_priority_psd(mp)
    assert dumps_sdpa(a) == dumps_sdpa(build_priority_psd(mp)[0])
    assert loads_sdpa(dumps_sdpa(b)).same_as(b)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("1\n1\n", "truncated"),
        ("1\n1\n2\n1\n1 2 1 1 1\n", "out of range"),
        ("1\n1\n2\n1\n1 1 3 1 1\n", "outside block"),
        ("1\n1\n-2\n1\n1 1 1 2 1\n", "off-diagonal"),
        ("1\n1\n2\n1\n1 1 1 2 1\n1 1 2 1 3\n", "non-symmetric"),
        ("1\n1\n2\n1\n1 1 1\n", "expected"),
        ("* formulation: BOGUS\n1\n1\n2\n1\n", "unknown formulation"),
        ("1\n1\n2\n\n", "truncated"),
    ],
)
def test_malformed_files_are_rejected(text, fragment):
    with pytest.raises(SdpaFormatError) as info:
        loads_sdpa(text)
    assert fragment in str(info.value)


def test_reader_accepts_sdpa_punctuation():
    sdp = loads_sdpa('"comment\n1 =m\n1\n{2}\n{1.5}\n0 1 1 2 1\n1 1 1 1 1\n1 1 2 2 1\n')
    assert sdp.c == (1.5,)
    assert sdp.F[0] == {(0, 0, 1): 1.0}


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), min_size=1, max_size=4),
    st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
)
def test_floats_round_trip_exactly(cs, v):
    m = len(cs)
    F = ({(0, 0, 1): v},) + tuple({(0, 0, 0): 1.0, (0, 1, 1): float(i + 1)} for i in range(m))
    sdp = SdpInstance((2,), tuple(cs), F)
    assert loads_sdpa(dumps_sdpa(sdp)).same_as(sdp)
