import io
import json
from pathlib import Path

import pytest

from cdtradeoff.app import run_cli
from cdtradeoff.auxiliary import private_input_inner_aux
from cdtradeoff.channel_io import save_inner_aux
from cdtradeoff.commands import EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VIOLATED
from cdtradeoff.config import AppConfig
from cdtradeoff.exports import parse_csv
from cdtradeoff.prob import Pmf
from cdtradeoff.runtime import CliRuntime


FIXTURES = Path(__file__).parent / "fixtures"


def make_runtime(tmp_path: Path, **overrides) -> CliRuntime:
    config = AppConfig(
        output_dir=str(tmp_path),
        log_level="WARNING",
        log_file="",
        user_debug_ids_enabled=False,
        include_traceback_for_warning=False,
        **overrides,
    )
    return CliRuntime(config=config, stdout=io.StringIO(), stderr=io.StringIO())


def test_figure_fig4_writes_into_output_dir(tmp_path) -> None:
    runtime = make_runtime(tmp_path)

    assert run_cli(["figure", "fig4", "--out", "fig4.csv"], runtime) == EXIT_OK

    text = (tmp_path / "fig4.csv").read_text(encoding="utf-8")
    records = parse_csv(text)
    assert len(records) == 18
    assert records[0]["outer"] == pytest.approx(1.0)
    assert records[-1]["outer"] == pytest.approx(1.5618506, abs=1e-6)
    assert runtime.written == str(tmp_path / "fig4.csv")
    assert runtime.stdout.getvalue() == ""


def test_region_corollary1_prints_csv(tmp_path) -> None:
    runtime = make_runtime(tmp_path)

    assert run_cli(["region", "corollary1", "--p", "0.5", "--r", "1"], runtime) == EXIT_OK

    lines = runtime.stdout.getvalue().splitlines()
    assert lines[0] == "R1,R2,D1,D2,source"
    (record,) = parse_csv(runtime.stdout.getvalue())
    assert (record["R1"], record["R2"], record["D1"], record["D2"]) == pytest.approx((0.6, 0.0, 0.2, 0.15), abs=1e-12)
    assert record["source"] == "corollary1"


def test_region_dueck_inner_reports_product_regime(tmp_path) -> None:
    runtime = make_runtime(tmp_path)

    assert run_cli(["region", "dueck-inner", "--ps1", "0.25", "--format", "json"], runtime) == EXIT_OK

    assert runtime.stderr.getvalue().strip() == "regime 1: CD = C x D with D_min = 0.125"
    payload = json.loads(runtime.stdout.getvalue())
    assert payload["regime"] == 1
    assert payload["product_form"] is True
    assert payload["d_min"] == pytest.approx(0.125)


def test_region_degraded_on_small_grid(tmp_path) -> None:
    runtime = make_runtime(tmp_path)

    code = run_cli(["region", "degraded", "--u-card", "2", "--grid-res", "4", "--format", "json"], runtime)

    assert code == EXIT_OK
    rows = json.loads(runtime.stdout.getvalue())["rows"]
    assert any(row["R1"] == pytest.approx(0.6) for row in rows)
    assert all(row["source"] == "degraded" for row in rows)


def test_region_degraded_refuses_dueck(tmp_path) -> None:
    runtime = make_runtime(tmp_path)

    assert run_cli(["region", "degraded", "--channel", "dueck"], runtime) == EXIT_USAGE
    assert "needs a physically degraded channel" in runtime.stderr.getvalue()


def test_region_thm1_identity_auxiliary(tmp_path) -> None:
    runtime = make_runtime(tmp_path)

    code = run_cli(["region", "thm1", "--aux", "identity", "--px", "0.5,0.5", "--format", "json"], runtime)

    assert code == EXIT_OK
    payload = json.loads(runtime.stdout.getvalue())
    assert payload["sum_bound"] == pytest.approx(0.0, abs=1e-12)
    assert payload["r1_bound"] == pytest.approx(0.6)


def test_region_prop3_feedback_preset(tmp_path) -> None:
    runtime = make_runtime(tmp_path)

    code = run_cli(["region", "prop3", "--channel", "dueck", "--beta", "0.5", "--format", "json"], runtime)

    assert code == EXIT_OK
    assert json.loads(runtime.stdout.getvalue())["sum_bound"] == pytest.approx(25 / 16, abs=1e-9)


def test_region_prop3_defaults_to_the_dueck_channel(tmp_path) -> None:
    runtime = make_runtime(tmp_path)

    assert run_cli(["region", "prop3", "--format", "json"], runtime) == EXIT_OK
    assert json.loads(runtime.stdout.getvalue())["sum_bound"] == pytest.approx(25 / 16, abs=1e-9)


def test_region_prop3_reads_an_auxiliary_document(tmp_path) -> None:
    aux_path = tmp_path / "aux.json"
    aux_path.write_text(json.dumps(save_inner_aux(private_input_inner_aux(Pmf.uniform(2), 4))), encoding="utf-8")
    runtime = make_runtime(tmp_path)

    code = run_cli(
        ["region", "prop3", "--channel", "multiplicative", "--aux-spec", str(aux_path), "--format", "json"],
        runtime,
    )

    assert code == EXIT_OK
    payload = json.loads(runtime.stdout.getvalue())
    assert payload["r1_bound"] == pytest.approx(0.6)
    assert payload["r2_bound"] == pytest.approx(0.0, abs=1e-12)
    assert payload["sum_bound"] == pytest.approx(0.6)


def test_region_prop3_needs_an_auxiliary_document_off_dueck(tmp_path) -> None:
    runtime = make_runtime(tmp_path)
    assert run_cli(["region", "prop3", "--channel", "multiplicative"], runtime) == EXIT_USAGE
    assert "--aux-spec" in runtime.stderr.getvalue()

    runtime = make_runtime(tmp_path)
    assert run_cli(["region", "prop3", "--aux-spec", str(tmp_path / "absent.json")], runtime) == EXIT_USAGE
    assert runtime.stderr.getvalue().startswith("error: cannot read auxiliary document")


def test_check_degraded_exit_codes(tmp_path) -> None:
    runtime = make_runtime(tmp_path)
    assert run_cli(["check", "degraded", "--channel", "multiplicative"], runtime) == EXIT_OK
    assert "physically degraded" in runtime.stderr.getvalue()

    runtime = make_runtime(tmp_path)
    assert run_cli(["check", "degraded", "--channel", "dueck"], runtime) == EXIT_VIOLATED
    assert "differs between X=" in runtime.stderr.getvalue()


def test_check_no_tradeoff_on_erasure_channel(tmp_path) -> None:
    runtime = make_runtime(tmp_path)

    assert run_cli(["check", "no-tradeoff", "--channel", "erasure"], runtime) == EXIT_OK
    assert runtime.stderr.getvalue().strip() == "no-tradeoff conditions hold"


def test_estimate_from_channel_document(tmp_path) -> None:
    runtime = make_runtime(tmp_path)

    code = run_cli(["estimate", "--spec", str(FIXTURES / "sensing_channel.json"), "--format", "json"], runtime)

    assert code == EXIT_OK
    payload = json.loads(runtime.stdout.getvalue())
    assert payload["channel"] == "sensing"
    assert {row["z_label"] for row in payload["rows"]} == {"clear", "target"}


def test_estimate_cross_checks_exhaustive_search(tmp_path) -> None:
    runtime = make_runtime(tmp_path)

    assert run_cli(["estimate", "--brute-force", "--px", "0.5,0.5"], runtime) == EXIT_OK
    assert runtime.stderr.getvalue().strip() == (
        "optimal estimator D = (0.200000000, 0.150000000); exhaustive search D = (0.200000000, 0.150000000)"
    )


def test_simulate_emits_json_summary(tmp_path) -> None:
    runtime = make_runtime(tmp_path)

    assert run_cli(["simulate", "--n", "2000", "--seed", "4"], runtime) == EXIT_OK

    payload = json.loads(runtime.stdout.getvalue())
    assert payload["n"] == 2000
    assert payload["seed"] == 4
    assert len(payload["receivers"]) == 2


def test_missing_channel_document_is_a_usage_error(tmp_path) -> None:
    runtime = make_runtime(tmp_path)

    assert run_cli(["estimate", "--spec", str(tmp_path / "absent.json")], runtime) == EXIT_USAGE
    assert runtime.stderr.getvalue().startswith("error: cannot read channel document")


def test_bad_input_law_is_a_usage_error(tmp_path) -> None:
    runtime = make_runtime(tmp_path)
    assert run_cli(["simulate", "--px", "a,b"], runtime) == EXIT_USAGE

    runtime = make_runtime(tmp_path)
    assert run_cli(["simulate", "--px", "0.5,0.4"], runtime) == EXIT_USAGE
    assert "error:" in runtime.stderr.getvalue()


def test_unwritable_output_is_an_io_error(tmp_path) -> None:
    (tmp_path / "blocked").write_text("not a directory", encoding="utf-8")
    runtime = make_runtime(tmp_path)

    assert run_cli(["region", "corollary2", "--out", "blocked/region.csv"], runtime) == EXIT_IO
    assert runtime.stderr.getvalue().startswith("error: cannot write output")


def test_argument_errors_map_to_usage(tmp_path) -> None:
    assert run_cli(["region", "nonsense"], make_runtime(tmp_path)) == EXIT_USAGE
    assert run_cli([], make_runtime(tmp_path)) == EXIT_USAGE
    assert run_cli(["--help"], make_runtime(tmp_path)) == EXIT_OK


def test_loose_tolerance_fails_validation(tmp_path) -> None:
    runtime = make_runtime(tmp_path, normalization_tol=0.1)
    assert run_cli(["region", "corollary1"], runtime) == EXIT_USAGE
