from core.parser import parse_symbol
from core.states import GaussianKernel, coherent_kernel
from utils.output import fmt, trajectory_table, write_csv


def test_fmt_round_trips():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(2) == "2"
    assert float(fmt(1 / 3)) == 1 / 3


def test_write_csv(tmp_path):
    path = write_csv(tmp_path / "nested" / "t.csv", ["a", "b"], [[1, 0.5], ["x", -2]])
    assert path.read_bytes() == b"a,b\n1,0.5\nx,-2\n"


def test_symbol_table_adds_imaginary_columns_only_when_needed():
    header, rows = trajectory_table([0.0, 1.0], [parse_symbol("q + p"), parse_symbol("q + i*hbar")])
    assert header == ["t", "q^1 p^0 hbar^0", "q^0 p^1 hbar^0", "q^0 p^0 hbar^1", "im q^0 p^0 hbar^1"]
    assert rows[0] == [0.0, 1.0, 1.0, 0.0, 0.0]
    assert rows[1] == [1.0, 1.0, 0.0, 0.0, 1.0]


def test_kernel_table(planck):
    k1 = coherent_kernel(planck, 1, 2)
    k2 = GaussianKernel(planck, 0, 0, shape=((2, 1), (1, 3)))
    header, rows = trajectory_table([0.0, 0.5], [k1, k2])
    assert header == ["t", "q0", "p0", "D_qq", "D_qp", "D_pp"]
    assert rows[0] == [0.0, 1, 2, 1, 0, 1]
    assert rows[1] == [0.5, 0, 0, 2, 1, 3]
