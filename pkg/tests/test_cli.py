import csv
import math

import pytest

from main import build_parser, main


def _rows(path):
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.reader(f))


class TestParser:
    def test_commands_registered(self):
        parser = build_parser()
        args = parser.parse_args(["bracket", "q", "p"])
        assert args.command == "bracket"
        assert args.f == "q" and args.g == "p"
        assert args.h is None

    def test_missing_command(self, capsys):
        assert main([]) == 2

    def test_unknown_flag(self, capsys):
        assert main(["bracket", "q", "p", "--colour"]) == 2


class TestBracket:
    def test_cubic_bracket(self, capsys):
        assert main(["bracket", "q^3", "p^3"]) == 0
        assert capsys.readouterr().out.strip() == "9*q^2*p^2 - 3/2*hbar^2"

    def test_canonical_pair(self, capsys):
        assert main(["bracket", "q", "p"]) == 0
        assert capsys.readouterr().out.strip() == "1"

    def test_parse_error(self, capsys):
        assert main(["bracket", "q^", "p"]) == 2
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "offset" in err

    def test_unknown_variable(self, capsys):
        assert main(["bracket", "x", "p"]) == 2


class TestQuantize:
    def test_writes_samples(self, tmp_path, capsys):
        out = tmp_path / "vector.csv"
        assert main(["quantize", "q", "--grid-n", "128", "--grid-L", "4", "--out", str(out)]) == 0
        assert "<f0, op f0>/<f0, f0>" in capsys.readouterr().out
        rows = _rows(out)
        assert rows[0] == ["q", "p", "re", "im"]
        assert len(rows) == 128 * 128 + 1
        assert float(rows[1][0]) == -4.0 and float(rows[2][1]) == -3.9375

    def test_classical_h(self, capsys):
        assert main(["quantize", "q", "--h", "0"]) == 2
        assert "h > 0" in capsys.readouterr().err

    def test_containment(self, capsys):
        assert main(["quantize", "q", "--grid-n", "64", "--grid-L", "1"]) == 3

    def test_unresolved_grid(self, capsys):
        assert main(["quantize", "q", "--h", "0.125", "--grid-n", "256", "--grid-L", "8"]) == 3
        assert "--grid-n 512" in capsys.readouterr().err

    def test_default_grid_follows_h(self, capsys):
        assert main(["quantize", "q^2", "--h", "0.125"]) == 0
        assert "on a 512² grid" in capsys.readouterr().out

    def test_bad_grid_size(self, capsys):
        assert main(["quantize", "q", "--grid-n", "100"]) == 2


class TestEvolve:
    QUARTER = math.pi / 2

    def _run(self, tmp_path, name, *flags):
        out = tmp_path / name
        code = main(["evolve", "q", "--t1", repr(4 * self.QUARTER), "--dt", repr(self.QUARTER),
                     "--out", str(out), *flags])
        assert code == 0
        return out

    def test_rotation_cycle(self, tmp_path, capsys):
        out = self._run(tmp_path, "cycle.csv", "--closed-form")
        assert "max |rk4 - closed form|" in capsys.readouterr().out
        rows = _rows(out)
        assert rows[0] == ["t", "q^1 p^0 hbar^0", "q^0 p^1 hbar^0"]
        values = [(float(q), float(p)) for _, q, p in rows[1:]]
        assert values == [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 0)]

    def test_rk4_close_to_closed_form(self, tmp_path):
        rows = _rows(self._run(tmp_path, "rk4.csv"))
        assert len(rows) == 6
        assert float(rows[2][2]) == pytest.approx(1.0, abs=1e-9)

    def test_zero_force_matches_oscillator(self, tmp_path):
        plain = self._run(tmp_path, "ho.csv", "--closed-form")
        forced = self._run(tmp_path, "forced.csv", "--closed-form", "--hamiltonian", "forced", "--Z0", "0")
        assert plain.read_bytes() == forced.read_bytes()

    def test_forced_runs(self, tmp_path, capsys):
        out = tmp_path / "forced.csv"
        assert main(["evolve", "p", "--hamiltonian", "forced", "--Z0", "1", "--Omega", "1",
                     "--t1", "1", "--dt", "0.5", "--out", str(out)]) == 0
        rows = _rows(out)
        assert rows[0][1:] == ["q^1 p^0 hbar^0", "q^0 p^1 hbar^0", "q^0 p^0 hbar^0"]

    def test_empty_span(self, capsys):
        assert main(["evolve", "q", "--t0", "1", "--t1", "1"]) == 2

    def test_degree_cap_below_symbol(self, capsys):
        assert main(["evolve", "q^3", "--degree-cap", "2"]) == 2

    def test_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("t1 = 0.5\ndt = 0.25\nclosed-form = true\n", encoding="utf-8")
        out = tmp_path / "cfg.csv"
        assert main(["evolve", "q", "--config", str(cfg), "--out", str(out)]) == 0
        rows = _rows(out)
        assert [float(r[0]) for r in rows[1:]] == pytest.approx([0.0, 0.25, 0.5])


class TestLimitScan:
    def test_oscillator(self, tmp_path, capsys):
        out = tmp_path / "scan.csv"
        code = main(["limit-scan", "1/2*q^2 + 1/2*p^2", "--q0", "1", "--p0", "2",
                     "--h-list", "1,0.5,0.25,0", "--out", str(out)])
        assert code == 0
        assert "fitted error order in h: 1.000000" in capsys.readouterr().out
        rows = _rows(out)
        assert rows[0] == ["h", "value_re", "value_im", "classical_value", "abs_error"]
        assert [float(r[0]) for r in rows[1:]] == [1.0, 0.5, 0.25, 0.0]
        assert float(rows[1][4]) == pytest.approx(1 / (4 * math.pi))
        assert all(float(r[3]) == 2.5 for r in rows[1:])

    def test_linear_observable(self, capsys):
        assert main(["limit-scan", "q", "--q0", "1", "--p0", "2"]) == 0
        assert "fitted error order in h: n/a" in capsys.readouterr().out

    def test_empty_list(self, capsys):
        assert main(["limit-scan", "q", "--h-list", ""]) == 2

    def test_zero_before_end(self, capsys):
        assert main(["limit-scan", "q", "--h-list", "0,1"]) == 2

    def test_quantum_symbol_rejected(self, capsys):
        assert main(["limit-scan", "hbar*q"]) == 2


class TestResonance:
    def _run(self, tmp_path, *flags):
        out, plot = tmp_path / "env.csv", tmp_path / "env.svg"
        code = main(["resonance", "--Z0", "1", "--t-max", "20", "--samples", "200",
                     "--out", str(out), "--plot-out", str(plot), *flags])
        return code, out, plot

    def test_resonant(self, tmp_path, capsys):
        code, out, plot = self._run(tmp_path, "--Omega", "1")
        assert code == 0
        assert "resonant drive" in capsys.readouterr().out
        rows = _rows(out)
        assert rows[0] == ["t", "envelope"]
        assert len(rows) == 201
        assert rows[1] == ["0", "0"]
        assert plot.read_text(encoding="utf-8").lstrip().startswith("<?xml")

    def test_off_resonance(self, tmp_path, capsys):
        code, _, _ = self._run(tmp_path, "--Omega", "2")
        assert code == 0
        assert "bounded drive" in capsys.readouterr().out

    def test_reproducible_files(self, tmp_path):
        first = tmp_path / "a"
        second = tmp_path / "b"
        first.mkdir()
        second.mkdir()
        _, out1, plot1 = self._run(first, "--Omega", "1")
        _, out2, plot2 = self._run(second, "--Omega", "1")
        assert out1.read_bytes() == out2.read_bytes()
        assert plot1.read_bytes() == plot2.read_bytes()

    def test_negative_amplitude(self, capsys):
        assert main(["resonance", "--Z0", "-1"]) == 2
