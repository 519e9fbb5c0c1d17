import json
from fractions import Fraction
from pathlib import Path

import pytest

from einstein_stability.cli import load_config, main, parse_config, render_report, run
from einstein_stability.errors import ParseError, SchemaError
from einstein_stability.verdict import Verdict

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, obj, name="c.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj, indent=1), encoding="utf-8")
    return str(path)


def test_torus_config_round_trip():
    cfg = load_config(str(CONFIGS / "torus_two_factor.json"))
    assert cfg.kind == "torus" and cfg.payload["config"].dims == (2, 2)
    assert cfg.solver.gauge_E == 1


def test_zero_column_is_schema_error():
    with pytest.raises(SchemaError, match="columns of b must be nonzero"):
        load_config(str(CONFIGS / "torus_zero_column.json"))


@pytest.mark.parametrize("mode, expected", [("exact", Fraction(4, 3)), ("float", 1.3333333333333333)])
def test_rational_strings(mode, expected):
    cfg = parse_config(json.dumps({"kind": "canonical", "mode": mode, "payload": {"n": 2, "r": 1, "E_hat": "4/3", "E_check": 1}}))
    got = cfg.payload["E_hat"]
    assert got == expected and type(got) is type(expected)


def test_decimal_literal_exact():
    cfg = parse_config('{"kind": "canonical", "payload": {"n": 2, "r": 1, "E_hat": 0.1, "E_check": 1}}')
    assert cfg.payload["E_hat"] == Fraction(1, 10)


def test_parse_error_has_line_and_field():
    text = '{\n "kind": "canonical",\n "payload": {\n  "n": 2,\n  "r": 1,\n  "E_hat": "1/x",\n  "E_check": 1\n }\n}'
    with pytest.raises(ParseError) as info:
        parse_config(text)
    assert info.value.line == 6 and info.value.field == "payload.E_hat"


def test_malformed_json_line():
    with pytest.raises(ParseError) as info:
        parse_config('{\n "kind": "qk",\n "payload": [\n}')
    assert info.value.line == 4


@pytest.mark.parametrize(
    "obj, match",
    [
        ({"kind": "nope"}, "kind"),
        ({"kind": "canonical", "mode": "fuzzy", "payload": {}}, "mode"),
        ({"kind": "canonical", "payload": {"n": 2, "r": 1, "E_hat": 1}}, "E_check"),
        ({"kind": "qk", "payload": {"N": [2, 2], "E": [1, 1], "x": [1, 1], "lam": [1, 1]}}, "m >= 3"),
    ],
)
def test_schema_errors(obj, match):
    with pytest.raises(SchemaError, match=match):
        parse_config(json.dumps(obj))


def test_homog_report():
    rep = run(parse_config(json.dumps({"kind": "homog-sp", "payload": {"m": 3, "q": 1, "k": 2}})))
    assert rep["quantities"]["quantity"] == -8
    assert rep["verdict"] is Verdict.UNSTABLE
    assert rep["witness"] == "g − ((n+r)/n)π*ǧ"


def test_circle_equality_report():
    rep = run(load_config(str(CONFIGS / "circle_equality.json")))
    assert rep["quantities"]["f"] == 0 and rep["verdict"] is Verdict.INCONCLUSIVE


def test_torus_report():
    rep = run(load_config(str(CONFIGS / "torus_two_factor.json"), action="analyze"))
    q = rep["quantities"]
    assert abs(q["E"] - 1) < 1e-10
    assert all(abs(v - 4 / 3) < 1e-8 for v in q["x"])
    assert abs(q["ghat"][0][0] - 16 / 9) < 1e-8
    assert rep["coindex_lower_bound"] >= 1
    assert rep["checks"]["routes_agree"]


def test_unstable_reports_carry_witness():
    for name, action in [("product.json", None), ("product_base.json", None), ("qk_equal.json", None), ("kahler.json", "kahler-bound")]:
        rep = run(load_config(str(CONFIGS / name), action=action))
        assert rep["verdict"] is Verdict.UNSTABLE and rep["witness"]


def test_inconclusive_has_no_witness():
    rep = run(load_config(str(CONFIGS / "hopf.json")))
    assert rep["verdict"] is Verdict.INCONCLUSIVE
    assert rep["witness"] is None
    assert rep["quantities"]["tested_direction"] == "g − ((n+r)/n)π*ǧ"


def test_float_margin_warning():
    cfg = parse_config(json.dumps({"kind": "canonical", "mode": "float", "payload": {"n": 1, "r": 1, "E_hat": 1, "E_check": 1.99999999999}}))
    rep = run(cfg)
    assert rep["verdict"] is Verdict.INCONCLUSIVE and rep["warnings"]


def test_json_rendering_rules():
    rep = {"b": Fraction(4, 3), "a": 0.1, "c": [1, Fraction(2)], "v": Verdict.UNSTABLE}
    text = render_report(rep, "json")
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert '"4/3"' in text and "0.10000000000000001" in text and '"Unstable"' in text


def test_markdown_rendering():
    rep = run(load_config(str(CONFIGS / "hopf.json")))
    text = render_report(rep, "md")
    assert "## Verdict" in text and "## Provenance" in text


def test_unknown_format():
    with pytest.raises(ValueError):
        render_report({}, "xml")


def test_main_exit_codes(tmp_path, capsys):
    assert main(["theorem1", "--config", str(CONFIGS / "product.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == "Unstable" and out["quantities"]["value"] == "-3"
    bad = write(tmp_path, {"kind": "submersion", "payload": {"n": 2, "r": 1, "E": 1, "fiber_scal": 0, "base_scal": 5, "a_norm_sq": 1}})
    assert main(["theorem1", "--config", bad]) == 1
    assert json.loads(capsys.readouterr().out)["error"]["type"] == "ConstraintViolation"
    warn = write(tmp_path, {"kind": "canonical", "mode": "float", "payload": {"n": 1, "r": 1, "E_hat": 1, "E_check": 1.99999999999}}, "w.json")
    assert main(["canonical", "--config", warn]) == 2


def test_kind_mismatch(capsys):
    assert main(["canonical", "--config", str(CONFIGS / "hopf.json")]) == 1
    assert "does not match" in capsys.readouterr().out


def test_usage_error_for_format():
    with pytest.raises(SystemExit) as info:
        main(["theorem1", "--config", str(CONFIGS / "hopf.json"), "--format", "xml"])
    assert info.value.code == 2


def test_homog_scan_without_config(capsys):
    assert main(["homog", "sp", "--scan", "--m-max", "5", "--q-max", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["quantities"]["rows"]) == 2 * (1 + 2 + 3)


def test_seed_env_overrides(monkeypatch, capsys):
    monkeypatch.setenv("EINSTEIN_STABILITY_SEED", "5")
    main(["verify", "--seed", "1", "--cases", "2"])
    assert json.loads(capsys.readouterr().out)["seed"] == 5


def test_torus_report_deterministic(capsys):
    args = ["torus", "analyze", "--config", str(CONFIGS / "torus_two_factor.json"), "--seed", "3"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first
