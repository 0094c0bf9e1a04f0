import numpy as np
import pytest

from radarbeat import synth
from radarbeat.estimator import EstimatorParams
from radarbeat.signal_model import RealSeries
from radarbeat.spectral import NlhsParams

FS = 100.0
T0 = 1.0 / FS


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def est_params():
    return EstimatorParams()


@pytest.fixture(scope="session")
def nlhs_params():
    return NlhsParams()


def harmonic_beat(freq=1.0, duration=60.0, n_harm=15, decay=0.85, amp=1e-4):
    """Noise-free periodic heartbeat displacement with a fixed rate."""
    cfg = synth.SynthConfig(
        duration_s=duration,
        resp_amp=0.0,
        heart_freqs=(freq,),
        heart_amp=amp,
        heart_harmonics=n_harm,
        heart_decay=decay,
    )
    return synth.generate(cfg).displacement


@pytest.fixture(scope="session")
def beat_1hz():
    return harmonic_beat(1.0)


def sine(freq, duration=60.0, amp=1.0, fs=FS, phase=0.0):
    t = np.arange(int(round(duration * fs))) / fs
    return RealSeries(amp * np.sin(2 * np.pi * freq * t + phase), 1.0 / fs)


# ---- acceptance summary ---------------------------------------------------

def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion."""

    def log(number, title, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {number:>2}: {title}"
        if detail:
            line += f" ({detail})"
        request.config._acceptance_lines.append((number, line))
        print(line)
        return passed

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines, key=lambda x: x[0]):
        terminalreporter.write_line(line)
