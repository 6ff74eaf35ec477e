import json

import numpy as np
import pytest

from chshblocks import formats as F
from chshblocks.analysis import scan
from chshblocks.chsh import MeasurementSettings
from chshblocks.errors import FormatError, StateInvariantError
from chshblocks.states import ghz, random_density, random_pure, singlet


@pytest.mark.parametrize("state", [random_pure((3, 4), 1), random_density((2, 3), 2), ghz(3)])
def test_state_roundtrip_is_lossless(state, tmp_path):
    path = tmp_path / "s.json"
    F.save_state(state, path)
    back = F.load_state(path)
    if hasattr(state, "amplitudes"):
        assert dict(back.amplitudes) == dict(state.amplitudes)
    else:
        assert np.array_equal(back.matrix, state.matrix)
    assert F.dumps(F.state_to_dict(back)) == path.read_text()


def pure_doc(amps, dims=(2, 2)):
    return {"kind": "pure", "dims": list(dims), "amplitudes": amps}


def test_pure_parsing_errors():
    with pytest.raises(FormatError):
        F.state_from_dict(pure_doc([{"idx": [1, 1], "re": 1}, {"idx": [1, 1], "re": 0}]))
    with pytest.raises(FormatError):
        F.state_from_dict(pure_doc([{"idx": [3, 1], "re": 1}]))
    with pytest.raises(FormatError):
        F.state_from_dict(pure_doc([{"idx": [1], "re": 1}]))
    with pytest.raises(FormatError):
        F.state_from_dict({"kind": "bogus", "dims": [2, 2]})
    with pytest.raises(StateInvariantError):
        F.state_from_dict(pure_doc([{"idx": [1, 1], "re": 2}]))


def test_pure_renormalization_within_policy():
    st = F.state_from_dict(pure_doc([{"idx": [1, 1], "re": 1 + 1e-8}]))
    assert st.amplitudes[(1, 1)] == 1


def test_mixed_parsing_errors():
    doc = F.state_to_dict(random_density((2, 2), 0))
    bad = json.loads(json.dumps(doc))
    bad["matrix"]["entries"] = bad["matrix"]["entries"][:-1]
    with pytest.raises(FormatError):
        F.state_from_dict(bad)
    bad = json.loads(json.dumps(doc))
    bad["matrix"]["entries"][0] = [2.0, 0.0]
    with pytest.raises(StateInvariantError):
        F.state_from_dict(bad)


def test_load_json_errors(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(FormatError):
        F.load_state(p)
    with pytest.raises(FormatError):
        F.load_state(tmp_path / "missing.json")


def test_settings_parsing():
    s = MeasurementSettings.standard()
    assert F.settings_from_dict(s.to_dict()) == s
    with pytest.raises(FormatError):
        F.settings_from_dict({"a1": [0, 0, 1]})
    with pytest.raises(FormatError):
        F.settings_from_dict({**s.to_dict(), "a1": [0, 0, 2]})


def test_report_schema():
    doc = F.report_to_dict(scan(singlet()), singlet())
    assert set(doc["semantics"]) == {"raw", "block"}
    assert doc["semantics"]["block"]["violated"]
    entry = doc["blocks"][0]
    assert set(entry) == {"p", "alpha", "beta", "weight", "raw_value", "block_value", "settings",
                          "block_concurrence"}
    assert set(doc["summary"]) >= {"entangled", "max_raw", "max_block", "certificate", "witness"}
    assert doc["concurrence"]["reduced_purity"] == pytest.approx(1)
    assert doc["concurrence"]["determinant_sum"] == pytest.approx(1)
    assert doc["concurrence"]["block_decomposition"] == pytest.approx(1)
    json.loads(F.dumps(doc))


def test_mixed_two_qubit_report_includes_wootters():
    rho = random_density((2, 2), 7)
    doc = F.report_to_dict(scan(rho), rho)
    assert doc["concurrence"]["wootters"] is not None
