"""
Corpus data model: dependency-parsed sentences, aligned sentence pairs and the
register map, plus readers and writers for their file formats.

Parsed files use one token per line with TAB-separated columns::

    INDEX FORM LEMMA POS DEPHEAD DEPREL SEMHEAD SEMREL MISC

``_`` marks an absent value, a blank line ends a sentence, and ``# id = <sid>``
and ``# lang = <zh|en>`` comments precede each block. The 12-column CoNLL-U
layout with SEMHEAD and SEMREL appended is accepted as well. Blocks are read
with ``conllu.parse_incr``; this module adds line-numbered format errors and
the tree checks on top.
"""

import io
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from conllu import parse_incr
from conllu.exceptions import ParseException

from src.exceptions import (
    CorpusFormatError,
    DanglingHeadError,
    LanguageMismatchError,
    RegisterMapError,
    UnknownSentenceError,
)
from src.utils import PathLike, logger, read_tsv

ABSENT = "_"

# names kept clear of the fields conllu parses into typed values, so every column stays a raw string
NATIVE_FIELDS = ("index", "word", "base", "tag", "dephead", "deplabel", "semhead", "semlabel", "notes")
CONLLU_SEM_FIELDS = (
    "index", "word", "base", "utag", "xtag", "morph", "dephead", "deplabel", "enhanced", "notes",
    "semhead", "semlabel",
)
LAYOUTS = {len(NATIVE_FIELDS): NATIVE_FIELDS, len(CONLLU_SEM_FIELDS): CONLLU_SEM_FIELDS}


class Language(str, Enum):
    ZH = "zh"
    EN = "en"


class Direction(str, Enum):
    ZH_EN = "ZH→EN"
    EN_ZH = "EN→ZH"

    @property
    def source_language(self) -> Language:
        return Language.ZH if self is Direction.ZH_EN else Language.EN

    @property
    def target_language(self) -> Language:
        return Language.EN if self is Direction.ZH_EN else Language.ZH

    @classmethod
    def parse(cls, value: str) -> "Direction":
        """Accept ``ZH→EN`` as well as the ASCII spellings ``ZH->EN`` and ``zh-en``."""
        normalized = value.strip().upper().replace("->", "→").replace("-", "→")
        for direction in cls:
            if direction.value == normalized:
                return direction
        raise ValueError(f"unknown direction: {value!r}")


class Register(str, Enum):
    A_PRESS = "A_PRESS"
    B_OFFICIAL_DOCUMENT = "B_OFFICIAL_DOCUMENT"
    C_ACADEMIC_PROSE = "C_ACADEMIC_PROSE"
    D_GENERAL_PROSE = "D_GENERAL_PROSE"
    E_LITERATURE = "E_LITERATURE"

    @classmethod
    def parse(cls, value: str) -> "Register":
        # register tables often spell two-word names with a space ("B_OFFICIAL DOCUMENT")
        normalized = value.strip().upper().replace(" ", "_")
        try:
            return cls(normalized)
        except ValueError:
            raise RegisterMapError(f"unknown register name: {value!r}") from None


@dataclass(frozen=True)
class ParsedToken:
    index: int
    form: str
    lemma: str
    pos: str
    dep_label: str
    dep_head: int
    sem_label: Optional[str] = None
    sem_head: Optional[int] = None
    misc: Optional[str] = None

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"token index must be >= 1, got {self.index}")
        if self.dep_head < 0:
            raise ValueError(f"dep_head must be >= 0, got {self.dep_head}")
        if self.dep_head == self.index:
            raise ValueError(f"token {self.index} is its own head")
        if (self.sem_label is None) != (self.sem_head is None):
            raise ValueError(f"token {self.index}: sem_label and sem_head must be both present or both absent")

    @property
    def has_semantics(self) -> bool:
        return self.sem_label is not None


@dataclass(frozen=True)
class ParsedSentence:
    id: str
    language: Language
    tokens: Tuple[ParsedToken, ...]
    text: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for position, token in enumerate(self.tokens, start=1):
            if token.index != position:
                raise CorpusFormatError(f"sentence {self.id}: token indices must be 1..n contiguous")
        size = len(self.tokens)
        for token in self.tokens:
            if token.dep_head > size:
                raise DanglingHeadError(
                    f"dangling head: sentence {self.id} token {token.index} has head {token.dep_head}"
                )
            if token.sem_head is not None and token.sem_head > size:
                raise DanglingHeadError(
                    f"dangling head: sentence {self.id} token {token.index} has semantic head {token.sem_head}"
                )

    def __len__(self) -> int:
        return len(self.tokens)

    def token(self, index: int) -> ParsedToken:
        """Token at a 1-based index."""
        return self.tokens[index - 1]

    @property
    def has_semantic_layer(self) -> bool:
        return any(token.has_semantics for token in self.tokens)

    def semantic_root(self) -> Optional[ParsedToken]:
        """The token whose semantic head is 0, if the semantic layer has one."""
        for token in self.tokens:
            if token.sem_head == 0:
                return token
        return None

    def surface(self) -> str:
        if self.text:
            return self.text
        separator = "" if self.language is Language.ZH else " "
        return separator.join(token.form for token in self.tokens)

    def forms(self) -> List[str]:
        return [token.form for token in self.tokens]


@dataclass(frozen=True)
class SentencePair:
    pair_id: str
    direction: Direction
    source: ParsedSentence
    target: ParsedSentence
    corpus: str
    genre: str
    register: Register

    def __post_init__(self):
        if self.source.language is not self.direction.source_language:
            raise LanguageMismatchError(
                f"pair {self.pair_id}: source {self.source.id} is {self.source.language.value}, "
                f"direction {self.direction.value} needs {self.direction.source_language.value}"
            )
        if self.target.language is not self.direction.target_language:
            raise LanguageMismatchError(
                f"pair {self.pair_id}: target {self.target.id} is {self.target.language.value}, "
                f"direction {self.direction.value} needs {self.direction.target_language.value}"
            )

    @property
    def zh(self) -> ParsedSentence:
        return self.source if self.source.language is Language.ZH else self.target

    @property
    def en(self) -> ParsedSentence:
        return self.source if self.source.language is Language.EN else self.target

    def side(self, name: str) -> ParsedSentence:
        if name == "source":
            return self.source
        if name == "target":
            return self.target
        raise ValueError(f"unknown side: {name!r}")


@dataclass(frozen=True)
class RegisterMap:
    entries: Mapping[Tuple[str, str], Register] = field(default_factory=dict)

    def resolve(self, corpus: str, genre: str) -> Register:
        try:
            return self.entries[(corpus, genre)]
        except KeyError:
            raise RegisterMapError(f"(corpus={corpus}, genre={genre}) is not in the register map") from None

    def __len__(self) -> int:
        return len(self.entries)


def _parse_int(value: str, what: str, path: str, line_number: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise CorpusFormatError(f"{what} must be an integer, got {value!r}", path, line_number) from None


def _optional(value: str) -> Optional[str]:
    return None if value == ABSENT or value == "" else value


@dataclass
class _Block:
    start: int
    token_lines: List[int] = field(default_factory=list)


def _scan_blocks(lines: List[str], path: str) -> Tuple[Tuple[str, ...], List[_Block]]:
    """Pick the column layout from the first token line and record each block's line numbers."""
    fields: Optional[Tuple[str, ...]] = None
    blocks: List[_Block] = []
    current: Optional[_Block] = None
    for line_number, line in enumerate(lines, start=1):
        if not line:
            if current is not None:
                if not current.token_lines:
                    raise CorpusFormatError("comment block without tokens", path, current.start)
                blocks.append(current)
            current = None
            continue
        if current is None:
            current = _Block(start=line_number)
        if line.startswith("#"):
            continue
        columns = len(line.split("\t"))
        if fields is None:
            if columns not in LAYOUTS:
                raise CorpusFormatError(
                    f"malformed line: expected {len(NATIVE_FIELDS)} or {len(CONLLU_SEM_FIELDS)} columns, "
                    f"got {columns}",
                    path, line_number,
                )
            fields = LAYOUTS[columns]
        elif columns != len(fields):
            raise CorpusFormatError(f"malformed line: expected {len(fields)} columns, got {columns}", path, line_number)
        current.token_lines.append(line_number)

    if current is not None:
        if not current.token_lines:
            raise CorpusFormatError("comment block without tokens", path, current.start)
        blocks.append(current)
    return fields or NATIVE_FIELDS, blocks


def _to_parsed_token(token: Mapping[str, Optional[str]], path: str, line_number: int) -> Optional[ParsedToken]:
    def column(name: str) -> str:
        return token.get(name) or ABSENT

    index = column("index")
    # multi-word token ranges and empty nodes carry no tree position
    if "-" in index or "." in index:
        return None

    if "tag" in token:
        pos = column("tag")
    else:
        pos = column("xtag") if column("xtag") != ABSENT else column("utag")

    sem_label = _optional(column("semlabel"))
    sem_head = _optional(column("semhead"))
    sem_head_value = None if sem_head is None else _parse_int(sem_head, "SEMHEAD", path, line_number)
    if (sem_label is None) != (sem_head_value is None):
        raise CorpusFormatError("SEMHEAD and SEMREL must be both present or both '_'", path, line_number)
    form = column("word")
    try:
        return ParsedToken(
            index=_parse_int(index, "INDEX", path, line_number),
            form=form,
            lemma=form if column("base") == ABSENT else column("base"),
            pos=pos,
            dep_label=column("deplabel"),
            dep_head=_parse_int(column("dephead"), "DEPHEAD", path, line_number),
            sem_label=sem_label,
            sem_head=sem_head_value,
            misc=_optional(column("notes")),
        )
    except ValueError as e:
        raise CorpusFormatError(str(e), path, line_number) from None


def _build_sentence(metadata: Mapping[str, Optional[str]], tokens: List[ParsedToken], language: Language,
                    path: str, line_number: int) -> ParsedSentence:
    sentence_id = metadata.get("id") or metadata.get("sent_id")
    if not sentence_id:
        raise CorpusFormatError("sentence block without '# id = ...' comment", path, line_number)
    declared = metadata.get("lang")
    if declared is not None and declared != language.value:
        raise LanguageMismatchError(
            f"{path}: sentence {sentence_id} declares lang={declared} but file was loaded as {language.value}"
        )
    return ParsedSentence(id=sentence_id, language=language, tokens=tuple(tokens), text=metadata.get("text"))


def load_parsed_file(path: PathLike, language: str) -> List[ParsedSentence]:
    """
    Load a dependency-parsed file.

    Args:
        path: Parsed file (9-column native layout or 12-column CoNLL-U + semantics)
        language: 'zh' or 'en'; every block's ``# lang`` comment must agree

    Returns:
        One ParsedSentence per blank-line-delimited block, in file order
    """
    language = Language(language)
    path = Path(path)
    if not path.exists():
        raise CorpusFormatError("parsed file not found", str(path))

    with open(path, 'r', encoding='utf-8') as f:
        # conllu only splits blocks on truly empty lines
        lines = ["" if not line.strip() else line for line in f.read().split("\n")]
    fields, blocks = _scan_blocks(lines, str(path))

    try:
        token_lists = list(parse_incr(io.StringIO("\n".join(lines) + "\n"), fields=fields))
    except ParseException as e:
        raise CorpusFormatError(f"unreadable block: {e}", str(path)) from None
    if len(token_lists) != len(blocks):
        raise CorpusFormatError(f"expected {len(blocks)} sentence blocks, conllu read {len(token_lists)}", str(path))

    sentences: List[ParsedSentence] = []
    for block, token_list in zip(blocks, token_lists):
        tokens: List[ParsedToken] = []
        for raw, line_number in zip(token_list, block.token_lines):
            token = _to_parsed_token(raw, str(path), line_number)
            if token is not None:
                tokens.append(token)
        sentences.append(_build_sentence(token_list.metadata, tokens, language, str(path), block.start))

    seen = set()
    for sentence in sentences:
        if sentence.id in seen:
            raise CorpusFormatError(f"duplicate sentence id {sentence.id}", str(path))
        seen.add(sentence.id)

    logger.info(f"Loaded {len(sentences)} {language.value} sentences from {path}")
    return sentences


def _column(value) -> str:
    return ABSENT if value is None else str(value)


def serialize_sentence(sentence: ParsedSentence) -> str:
    """Render one sentence block in the native 9-column layout (no trailing blank line)."""
    lines = [f"# id = {sentence.id}", f"# lang = {sentence.language.value}"]
    if sentence.text is not None:
        lines.append(f"# text = {sentence.text}")
    for token in sentence.tokens:
        lines.append("\t".join([
            str(token.index), token.form, token.lemma, token.pos,
            str(token.dep_head), token.dep_label,
            _column(token.sem_head), _column(token.sem_label), _column(token.misc),
        ]))
    return "\n".join(lines)


def write_parsed_file(sentences: Iterable[ParsedSentence], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blocks = [serialize_sentence(sentence) for sentence in sentences]
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write("\n\n".join(blocks))
        if blocks:
            f.write("\n")
    return path


def load_register_map(path: PathLike) -> RegisterMap:
    """
    Load the (corpus, genre) -> register mapping.

    Args:
        path: UTF-8 TSV with header ``corpus, genre, register``

    Returns:
        RegisterMap; duplicate keys and unknown register names are rejected
    """
    entries: Dict[Tuple[str, str], Register] = {}
    for row in read_tsv(path, ("corpus", "genre", "register")):
        key = (row["corpus"], row["genre"])
        if key in entries:
            raise RegisterMapError(f"{path}:{row['_line']}: duplicate entry for corpus={key[0]} genre={key[1]}")
        try:
            entries[key] = Register.parse(row["register"])
        except RegisterMapError as e:
            raise RegisterMapError(f"{path}:{row['_line']}: {e}") from None
    logger.info(f"Loaded register map with {len(entries)} entries from {path}")
    return RegisterMap(entries=entries)


def index_sentences(*collections: Iterable[ParsedSentence]) -> Dict[str, ParsedSentence]:
    """Merge sentence lists into one id index; ids must be unique across files."""
    index: Dict[str, ParsedSentence] = {}
    for collection in collections:
        for sentence in collection:
            if sentence.id in index:
                raise CorpusFormatError(f"sentence id {sentence.id} appears in more than one parsed file")
            index[sentence.id] = sentence
    return index


MANIFEST_HEADER = ("pair_id", "direction", "corpus", "genre", "src_id", "tgt_id")


def load_manifest(path: PathLike, register_map: RegisterMap,
                  sentences: Mapping[str, ParsedSentence]) -> List[SentencePair]:
    """
    Load the pair alignment manifest.

    Args:
        path: UTF-8 TSV with header ``pair_id, direction, corpus, genre, src_id, tgt_id``
        register_map: Resolves each row's (corpus, genre) to a register
        sentences: Previously loaded sentences indexed by id

    Returns:
        One SentencePair per manifest row, in file order
    """
    pairs: List[SentencePair] = []
    seen = set()
    for row in read_tsv(path, MANIFEST_HEADER):
        location = f"{path}:{row['_line']}"
        if row["pair_id"] in seen:
            raise CorpusFormatError(f"duplicate pair_id {row['pair_id']}", str(path), int(row["_line"]))
        seen.add(row["pair_id"])
        try:
            direction = Direction.parse(row["direction"])
        except ValueError as e:
            raise CorpusFormatError(str(e), str(path), int(row["_line"])) from None
        for column in ("src_id", "tgt_id"):
            if row[column] not in sentences:
                raise UnknownSentenceError(f"{location}: unknown sentence id {row[column]!r}")
        try:
            register = register_map.resolve(row["corpus"], row["genre"])
        except RegisterMapError as e:
            raise RegisterMapError(f"{location}: {e}") from None
        pairs.append(SentencePair(
            pair_id=row["pair_id"],
            direction=direction,
            source=sentences[row["src_id"]],
            target=sentences[row["tgt_id"]],
            corpus=row["corpus"],
            genre=row["genre"],
            register=register,
        ))
    logger.info(f"Loaded {len(pairs)} sentence pairs from {path}")
    return pairs
