from tuckercomplete import kernels
from tuckercomplete.benchmark import main


def test_benchmark_runs_and_restores_backend(capsys):
    before = kernels.active_backend()
    rc = main(["--d", "8", "--r", "1", "--alpha", "4", "--repeat", "1"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "tucker_values" in out and "descent_iteration" in out
    assert kernels.active_backend() == before
