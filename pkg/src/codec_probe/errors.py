"""Exception hierarchy shared by all codec-probe modules."""


class CodecProbeError(Exception):
    """Base class for every error raised by this package."""


# --- audio I/O and signal handling ---

class MissingFile(CodecProbeError):
    pass


class MalformedContainer(CodecProbeError):
    pass


class UnsupportedEncoding(CodecProbeError):
    pass


class MultichannelInput(CodecProbeError):
    pass


class IoFailure(CodecProbeError):
    pass


class EmptySignal(CodecProbeError):
    pass


class RateMismatch(CodecProbeError):
    pass


class EmptyOverlap(CodecProbeError):
    pass


# --- signal generation and degradation ---

class FrequencyAboveNyquist(CodecProbeError):
    pass


class SilentInput(CodecProbeError):
    pass


class EmptyTail(CodecProbeError):
    pass


# --- codec invocation ---

class CodecCrashed(CodecProbeError):
    def __init__(self, message, stderr=""):
        super().__init__(message)
        self.stderr = stderr


class Timeout(CodecProbeError):
    pass


class SpawnFailure(CodecProbeError):
    pass


class MalformedOutput(CodecProbeError):
    pass


class NonFiniteOutput(CodecProbeError):
    pass


# --- RVQ codec ---

class InsufficientData(CodecProbeError):
    pass


class DegenerateCorpus(CodecProbeError):
    pass


class StageOutOfRange(CodecProbeError):
    pass


class ModelMismatch(CodecProbeError):
    pass


# --- metrics ---

class EmptyReference(CodecProbeError):
    pass


class MissingClass(CodecProbeError):
    pass


class IdMismatch(CodecProbeError):
    pass


class SilentOutput(CodecProbeError):
    pass


# --- harness ---

class MalformedManifest(CodecProbeError):
    pass


class MissingAudio(CodecProbeError):
    pass


class ConfigInvalid(CodecProbeError):
    pass
