"""Exception hierarchy shared by all rppgq modules.

Every error carries a distinct CLI exit code so batch runs can be
scripted against failure categories.
"""


class RppgError(Exception):
    """Base class for all rppgq errors."""

    exit_code = 1


# --- frame / trace ingestion ---

class MalformedHeader(RppgError):
    exit_code = 10


class TruncatedPayload(RppgError):
    exit_code = 11


class UnsupportedVersion(RppgError):
    exit_code = 12


class RoiOutOfBounds(RppgError):
    exit_code = 13

    def __init__(self, frame_index: int):
        super().__init__(f"ROI out of frame bounds at frame {frame_index}")
        self.frame_index = frame_index


class NonNumericLine(RppgError):
    exit_code = 14

    def __init__(self, line_no: int):
        super().__init__(f"non-numeric value at line {line_no}")
        self.line_no = line_no


class NonIntegerRatio(RppgError):
    exit_code = 15


class TooManyGaps(RppgError):
    exit_code = 16


# --- DSP ---

class WindowTooShort(RppgError):
    exit_code = 20


class BadSize(RppgError):
    exit_code = 21


class EmptySpectrum(RppgError):
    exit_code = 22


# --- estimation ---

class TraceTooShort(RppgError):
    exit_code = 30


class UnusableWindow(RppgError):
    exit_code = 31


# --- simulation ---

class BadConfig(RppgError):
    exit_code = 40


class ArtifactOutOfRange(RppgError):
    exit_code = 41


class EmptyReference(RppgError):
    exit_code = 42


# --- evaluation ---

class LengthMismatch(RppgError):
    exit_code = 50


class EmptyCorpus(RppgError):
    exit_code = 51
