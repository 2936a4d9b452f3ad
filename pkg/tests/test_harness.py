import json

import numpy as np
import pytest

import oracle
from qsdc import cli
from qsdc.adversary import AnnouncementPolicy, TrentStrategy
from qsdc.harness import (
    ConfigError,
    RunConfig,
    binomial_interval,
    emit_tables,
    render_tables,
    run_experiment,
    verify_identities,
)
from qsdc.protocol import EncodingVariant, ProtocolId

P1, P2 = ProtocolId.PROTOCOL_1, ProtocolId.PROTOCOL_2
ORIGINAL, REVISED = EncodingVariant.ORIGINAL, EncodingVariant.REVISED


class TestRunConfig:
    def test_defaults_are_valid(self):
        RunConfig()

    @pytest.mark.parametrize(
        "field,value",
        [
            ("message_length", 0),
            ("check_fraction", 1.0),
            ("abort_threshold", 1.5),
            ("seed", -1),
            ("rounds_repeat", 0),
            ("output_format", "xml"),
            ("noise_probability", 2.0),
        ],
    )
    def test_invalid_field_names_field(self, field, value):
        with pytest.raises(ConfigError, match=field):
            RunConfig(**{field: value})


class TestRunExperiment:
    def test_honest_revised_is_error_free(self):
        report = run_experiment(
            RunConfig(protocol=P1, variant=REVISED, message_length=2000, seed=42)
        )
        assert report.bob_error_rate == 0.0
        assert report.abort_fraction == 0.0
        assert report.trent_guess_accuracy is None

    def test_attacked_original_leaks_everything(self):
        report = run_experiment(
            RunConfig(
                protocol=P1,
                variant=ORIGINAL,
                trent=TrentStrategy.attack(),
                message_length=2000,
                seed=42,
            )
        )
        assert report.trent_guess_accuracy == 1.0
        assert report.abort_fraction == 1.0

    def test_attacked_error_rate_matches_oracle(self):
        expected = oracle.attacked_error_probability(2, "original", 0)
        report = run_experiment(
            RunConfig(
                protocol=P2,
                variant=ORIGINAL,
                trent=TrentStrategy.attack(),
                message_length=5000,
                seed=1,
            )
        )
        sigma = np.sqrt(expected * (1 - expected) / report.check_rounds)
        assert abs(report.bob_error_rate - expected) < 3 * sigma

    def test_histogram_counts_sum_to_rounds(self):
        report = run_experiment(
            RunConfig(protocol=P2, variant=REVISED, message_length=500, seed=3, rounds_repeat=2)
        )
        assert sum(report.histogram.values()) == report.total_rounds

    def test_rates_lie_in_unit_interval(self):
        report = run_experiment(
            RunConfig(
                protocol=P1,
                variant=REVISED,
                trent=TrentStrategy.attack(),
                message_length=400,
                seed=9,
            )
        )
        for value in (
            report.bob_error_rate,
            report.trent_guess_accuracy,
            report.z_equal_fraction,
            report.abort_fraction,
        ):
            assert 0.0 <= value <= 1.0

    def test_noise_knob_reaches_abort_path(self):
        report = run_experiment(
            RunConfig(
                protocol=P1,
                variant=REVISED,
                message_length=500,
                seed=4,
                noise_probability=0.25,
            )
        )
        assert report.bob_error_rate > 0.02
        assert report.abort_fraction == 1.0


class TestDeterminism:
    def test_identical_configs_give_identical_reports(self):
        config = RunConfig(
            protocol=P2,
            variant=ORIGINAL,
            trent=TrentStrategy.attack(),
            message_length=1500,
            seed=123,
            rounds_repeat=3,
        )
        a = run_experiment(config).to_json()
        b = run_experiment(config).to_json()
        assert a == b

    def test_different_seeds_differ(self):
        base = dict(
            protocol=P1, variant=ORIGINAL, trent=TrentStrategy.attack(), message_length=500
        )
        a = run_experiment(RunConfig(seed=1, **base)).to_json()
        b = run_experiment(RunConfig(seed=2, **base)).to_json()
        assert a != b

    def test_csv_also_deterministic(self):
        config = RunConfig(protocol=P1, variant=REVISED, message_length=300, seed=5)
        assert run_experiment(config).to_csv() == run_experiment(config).to_csv()


class TestStatisticalSoundness:
    def test_sampled_rates_track_exact_values(self):
        # attacked revised guess accuracy has exact value 0.5; nearly all
        # independent seeds must land within 4 sigma
        expected = oracle.attacked_guess_accuracy(1, "revised")
        assert expected == pytest.approx(0.5, abs=1e-12)
        n_bits = 2000
        misses = 0
        for seed in range(40):
            report = run_experiment(
                RunConfig(
                    protocol=P1,
                    variant=REVISED,
                    trent=TrentStrategy.attack(),
                    message_length=n_bits // 2,
                    seed=seed,
                )
            )
            sigma = np.sqrt(0.25 / report.total_rounds)
            if abs(report.trent_guess_accuracy - expected) > 4 * sigma:
                misses += 1
        assert misses == 0


class TestIdentitiesAndTables:
    def test_verify_identities_all_pass(self):
        assert all(residual < 1e-12 for _, residual in verify_identities())

    def test_emit_tables_covers_all_pairs(self):
        tables = emit_tables()
        assert set(tables) == {(p, v) for p in ProtocolId for v in EncodingVariant}
        for rows in tables.values():
            assert len(rows) == 8  # 4 reachable pairs per bit

    def test_render_tables_mentions_all_outcomes(self):
        text = render_tables()
        for name in ("PHI_PLUS", "PSI_MINUS", "PLUS", "MINUS"):
            assert name in text


class TestBinomialInterval:
    def test_basic_properties(self):
        low, high = binomial_interval(50, 100)
        assert low < 0.5 < high
        assert binomial_interval(0, 0) == (0.0, 0.0)
        assert binomial_interval(0, 100)[0] == 0.0
        assert binomial_interval(100, 100)[1] == 1.0


class TestCli:
    def test_run_json_to_stdout(self, capsys):
        status = cli.main(
            ["run", "--protocol", "1", "--variant", "revised", "--trent", "honest",
             "--bits", "200", "--seed", "11"]
        )
        assert status == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["bob_error_rate"] == 0.0
        assert payload["schema_version"] == 1
        assert payload["config"]["seed"] == 11

    def test_run_csv_to_file(self, tmp_path, capsys):
        out = tmp_path / "report.csv"
        status = cli.main(
            ["run", "--bits", "100", "--format", "csv", "--seed", "2", "--out", str(out)]
        )
        assert status == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("row,")
        assert lines[-1].startswith("summary,")

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text(
            "# experiment setup\nprotocol = 2\nvariant = original\ntrent = attack\n"
            "bits = 150\nseed = 6\n"
        )
        status = cli.main(["run", "--config", str(config), "--seed", "7"])
        assert status == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["config"]["protocol"] == 2
        assert payload["config"]["seed"] == 7  # flag wins
        assert payload["trent_guess_accuracy"] == 1.0

    def test_bad_config_value_exits_nonzero(self, capsys):
        status = cli.main(["run", "--bits", "-5"])
        assert status == 2
        assert "configuration error" in capsys.readouterr().err

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        config = tmp_path / "bad.cfg"
        config.write_text("qubits = 3\n")
        assert cli.main(["run", "--config", str(config)]) == 2

    def test_verify_subcommand(self, capsys):
        assert cli.main(["verify"]) == 0
        out = capsys.readouterr().out
        assert out.count("ok") == 16
        assert "FAIL" not in out

    def test_tables_subcommand(self, capsys):
        assert cli.main(["tables"]) == 0
        assert "protocol 1, revised encoding" in capsys.readouterr().out
