import numpy as np
import pytest

from codec_probe import rvq
from codec_probe.audio import read_wav
from codec_probe.harness import load_manifest
from codec_probe.smoke import DEFAULT_SEED, build_smoke_corpus

SMOKE_RVQ = dict(frame_size=64, stages=4, entries=16, seed=DEFAULT_SEED)


@pytest.fixture(scope="session")
def smoke_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("smoke")
    build_smoke_corpus(out, n_utterances=10, seed=DEFAULT_SEED)
    return out


@pytest.fixture(scope="session")
def smoke_entries(smoke_dir):
    return load_manifest(smoke_dir / "manifest.csv")


@pytest.fixture(scope="session")
def smoke_waves(smoke_entries):
    return [read_wav(e.wav_path) for e in smoke_entries]


@pytest.fixture(scope="session")
def smoke_model(smoke_waves):
    return rvq.train(smoke_waves, **SMOKE_RVQ)


@pytest.fixture(scope="session")
def heldout_waves():
    """20 utterances disjoint from the training corpus."""
    from codec_probe.smoke import speech_like
    return [speech_like(DEFAULT_SEED + 500 + i) for i in range(20)]


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.Philox(20260810))
