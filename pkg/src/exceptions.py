"""
Error types raised by the passivelens pipeline.

Every error carries a machine-parsable ``code`` and the process ``exit_code``
the CLI uses when the error reaches it.

Exit codes
----------
0 - success
1 - unexpected internal error
2 - input, format or configuration error
3 - human/system pair sets differ
"""

from typing import Iterable, List, Optional, Set


class PassiveLensError(Exception):
    """Base class for all expected pipeline failures."""

    code = "E_GENERIC"
    exit_code = 1

    def one_line(self) -> str:
        """Render the error as a single ``CODE: message`` line."""
        message = " ".join(str(self).split())
        return f"{self.code}: {message}"


class CorpusFormatError(PassiveLensError):
    """A parsed file or TSV does not follow its column layout."""

    code = "E_FORMAT"
    exit_code = 2

    def __init__(self, message: str, path: Optional[str] = None, line_number: Optional[int] = None):
        location = ""
        if path is not None:
            location = f"{path}"
            if line_number is not None:
                location += f":{line_number}"
            location += ": "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line_number = line_number


class DanglingHeadError(CorpusFormatError):
    """A dependency head points outside its sentence."""


class LanguageMismatchError(PassiveLensError):
    code = "E_LANGUAGE"
    exit_code = 2


class UnknownSentenceError(PassiveLensError):
    code = "E_UNKNOWN_ID"
    exit_code = 2


class RegisterMapError(PassiveLensError):
    code = "E_REGISTER"
    exit_code = 2


class ConfigError(PassiveLensError):
    code = "E_CONFIG"
    exit_code = 2


class UsageError(PassiveLensError):
    """Bad command-line usage: unknown option, missing argument, invalid choice."""

    code = "E_USAGE"
    exit_code = 2


class CorrectionsError(PassiveLensError):
    code = "E_CORRECTIONS"
    exit_code = 2


class MetricInputError(PassiveLensError):
    code = "E_METRIC"
    exit_code = 2


class EmptyColumnError(PassiveLensError):
    code = "E_EMPTY"
    exit_code = 2


class PairSetMismatchError(PassiveLensError):
    """Two annotation or output sets do not cover the same pairs."""

    code = "E_PAIR_SET"
    exit_code = 3

    def __init__(self, what: str, missing: Iterable[str] = (), extra: Iterable[str] = ()):
        self.missing: Set[str] = set(missing)
        self.extra: Set[str] = set(extra)
        parts = [what]
        if self.missing:
            parts.append("missing pair_ids: " + ",".join(sorted(self.missing)))
        if self.extra:
            parts.append("unexpected pair_ids: " + ",".join(sorted(self.extra)))
        super().__init__("; ".join(parts))


class RuleNotEvaluableError(PassiveLensError):
    """
    A strategy rule needs the semantic dependency layer but the sentence has none.

    ``partial`` holds the hits of the branches of the rule that could still be
    evaluated on the syntactic layer alone.
    """

    code = "E_NOT_EVALUABLE"
    exit_code = 2

    def __init__(self, rule: str, sentence_id: str, partial: Optional[List] = None):
        super().__init__(f"rule not evaluable: {rule} needs a semantic layer (sentence {sentence_id})")
        self.rule = rule
        self.sentence_id = sentence_id
        self.partial = list(partial or [])
