"""Parser for the ``.acm`` textual model format.

Example::

    # business layer
    survey SV1 "Interview notes"
    process BP1 "Order fulfillment" { owner: sales; priority: 1 }
    trace SV1 - justifies -> BP1 "interview 3, Q7"
    trace OS1 - realized_by -> DG1 { seq: 1 }

Statements are either artifact declarations (kind keyword, id, quoted name,
optional attribute block) or ``trace`` links. Syntax errors produce
diagnostics and the parser resumes at the next line that starts like a
statement. The ``description`` attribute of an artifact fills its
description field.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .diagnostics import Diagnostic, Severity, SourceLocation
from .metamodel import KEYWORD_KINDS, Artifact, LinkKind, TraceLink

SYNTAX_ERROR = "P001"
MALFORMED_ARROW = "P002"
UNTERMINATED_TEXT = "P003"
BAD_ESCAPE = "P004"
BAD_ATTRIBUTE = "P005"

STATEMENT_KEYWORDS = frozenset(KEYWORD_KINDS) | {"trace"}

_IDENT = re.compile(r"[A-Za-z_](?:[A-Za-z0-9_.]|-(?!>))*")
_INT = re.compile(r"[0-9]+")
_LINK_KINDS = {k.value: k for k in LinkKind}


@dataclass(frozen=True)
class Token:
    type: str  # ident, int, text, punct, error, eof
    value: str
    loc: SourceLocation
    line_start: bool = False


@dataclass
class ParseResult:
    artifacts: list[Artifact] = field(default_factory=list)
    links: list[TraceLink] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(d.is_error for d in self.diagnostics)


class _StatementError(Exception):
    def __init__(self, token: Token, diagnostic: Diagnostic | None):
        self.token = token
        self.diagnostic = diagnostic


def _tokenize(text: str, file_name: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        i = 0
        first = True

        def loc(pos: int) -> SourceLocation:
            return SourceLocation(file_name, lineno, len(line[:pos].encode("utf-8")) + 1)

        while i < len(line):
            ch = line[i]
            if ch in " \t\f\v\ufeff":
                i += 1
                continue
            if ch == "#":
                break
            start = i
            if ch == '"':
                value, i, problem = _scan_text(line, i)
                if problem is None:
                    tokens.append(Token("text", value, loc(start), first))
                else:
                    code, msg, pos = problem
                    diags.append(Diagnostic(code, Severity.ERROR, msg, loc(pos)))
                    tokens.append(Token("error", line[start:i], loc(start), first))
            elif m := _IDENT.match(line, i):
                tokens.append(Token("ident", m.group(), loc(start), first))
                i = m.end()
            elif m := _INT.match(line, i):
                tokens.append(Token("int", m.group(), loc(start), first))
                i = m.end()
            elif line.startswith("->", i):
                tokens.append(Token("punct", "->", loc(start), first))
                i += 2
            elif ch in "-{}:;":
                tokens.append(Token("punct", ch, loc(start), first))
                i += 1
            else:
                diags.append(Diagnostic(SYNTAX_ERROR, Severity.ERROR, f"unexpected character {ch!r}", loc(start)))
                tokens.append(Token("error", ch, loc(start), first))
                i += 1
            first = False
    lines = text.split("\n")
    last = lines[-1].rstrip("\r")
    tokens.append(Token("eof", "", SourceLocation(file_name, len(lines), len(last.encode("utf-8")) + 1), True))
    return tokens, diags


def _scan_text(line: str, i: int) -> tuple[str, int, tuple[str, str, int] | None]:
    """Scan a quoted literal starting at ``line[i] == '"'``."""
    out: list[str] = []
    j = i + 1
    while j < len(line):
        ch = line[j]
        if ch == '"':
            return "".join(out), j + 1, None
        if ch == "\\":
            nxt = line[j + 1] if j + 1 < len(line) else ""
            if nxt in ('"', "\\"):
                out.append(nxt)
                j += 2
                continue
            # consume the rest of the literal so the error is reported once
            close = line.find('"', j + 2)
            end = len(line) if close < 0 else close + 1
            return "", end, (BAD_ESCAPE, f"invalid escape sequence '\\{nxt}' in text literal", j)
        out.append(ch)
        j += 1
    return "", len(line), (UNTERMINATED_TEXT, "unterminated text literal", i)


class _Parser:
    def __init__(self, tokens: list[Token], result: ParseResult):
        self.tokens = tokens
        self.pos = 0
        self._start = 0
        self.result = result

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != "eof":
            self.pos += 1
        return tok

    def fail(self, message: str, code: str = SYNTAX_ERROR, tok: Token | None = None) -> _StatementError:
        tok = tok or self.tok
        if tok.type == "error" and (not tok.line_start or tok is self.tokens[self._start]):
            # lexer already reported this token
            return _StatementError(tok, None)
        if tok.type == "eof":
            message += " (reached end of input)"
        return _StatementError(tok, Diagnostic(code, Severity.ERROR, message, tok.loc))

    def expect(self, ttype: str, what: str, value: str | None = None, code: str = SYNTAX_ERROR) -> Token:
        tok = self.tok
        if tok.type != ttype or (value is not None and tok.value != value):
            raise self.fail(f"expected {what}, found {_describe(tok)}", code)
        return self.advance()

    def run(self) -> None:
        while self.tok.type != "eof":
            start = self._start = self.pos
            try:
                self.statement()
            except _StatementError as err:
                if err.diagnostic is not None:
                    self.result.diagnostics.append(err.diagnostic)
                self.recover(start)

    def recover(self, start: int) -> None:
        """Skip to the next line that looks like a statement: ``word word ...``."""
        self.pos = max(self.pos, start + 1)
        while self.tok.type != "eof":
            tok = self.tok
            if tok.type == "ident" and tok.line_start and (
                tok.value in STATEMENT_KEYWORDS or self.tokens[self.pos + 1].type == "ident"
            ):
                return
            self.pos += 1

    def statement(self) -> None:
        tok = self.tok
        if tok.type == "ident" and tok.value == "trace":
            self.link_decl()
        elif tok.type == "ident" and tok.value in KEYWORD_KINDS:
            self.artifact_decl()
        elif tok.type == "ident":
            raise self.fail(f"unknown keyword '{tok.value}'")
        else:
            raise self.fail(f"expected a declaration or 'trace', found {_describe(tok)}")

    def artifact_decl(self) -> None:
        kw = self.advance()
        ident = self.expect("ident", "artifact id")
        name = self.expect("text", "quoted artifact name")
        if not name.value:
            raise self.fail("artifact name must not be empty", tok=name)
        attrs = self.attr_block() if self._at("{") else {}
        description = attrs.pop("description", None)
        self.result.artifacts.append(Artifact(
            id=ident.value,
            kind=KEYWORD_KINDS[kw.value],
            name=name.value,
            description=description[0] if description else None,
            attrs={k: v for k, (v, _) in attrs.items()},
            loc=kw.loc,
        ))

    def link_decl(self) -> None:
        kw = self.advance()
        source = self.expect("ident", "source id")
        self.expect("punct", "'-' before link kind", "-", MALFORMED_ARROW)
        kind_tok = self.expect("ident", "link kind")
        kind = _LINK_KINDS.get(kind_tok.value)
        if kind is None:
            raise self.fail(f"unknown link kind '{kind_tok.value}'", tok=kind_tok)
        self.expect("punct", "'->' after link kind", "->", MALFORMED_ARROW)
        target = self.expect("ident", "target id")
        rationale = self.advance().value if self.tok.type == "text" else None
        attrs = self.attr_block() if self._at("{") else {}
        seq = None
        for key, (value, tok) in attrs.items():
            if key != "seq":
                raise self.fail(f"unknown link attribute '{key}'", BAD_ATTRIBUTE, tok)
            if kind is not LinkKind.realized_by:
                raise self.fail(f"'seq' is only allowed on realized_by links, not {kind.value}", BAD_ATTRIBUTE, tok)
            if not value.isdigit() or int(value) < 1:
                raise self.fail(f"'seq' must be a positive integer, got {value!r}", BAD_ATTRIBUTE, tok)
            seq = int(value)
        self.result.links.append(TraceLink(
            kind=kind, source=source.value, target=target.value,
            rationale=rationale, seq=seq, loc=kw.loc,
        ))

    def attr_block(self) -> dict[str, tuple[str, Token]]:
        self.advance()
        attrs: dict[str, tuple[str, Token]] = {}
        while not self._at("}"):
            key = self.expect("ident", "attribute name or '}'")
            self.expect("punct", "':' after attribute name", ":")
            value = self.tok
            if value.type not in ("text", "ident", "int"):
                raise self.fail(f"expected attribute value, found {_describe(value)}")
            self.advance()
            if key.value in attrs:
                raise self.fail(f"duplicate attribute '{key.value}'", BAD_ATTRIBUTE, key)
            attrs[key.value] = (value.value, key)
            if self._at(";"):
                self.advance()
        self.advance()
        return attrs

    def _at(self, punct: str) -> bool:
        return self.tok.type == "punct" and self.tok.value == punct


def _describe(tok: Token) -> str:
    if tok.type == "eof":
        return "end of input"
    if tok.type == "text":
        return "text literal"
    return f"'{tok.value}'"


def parse(source_text: str, file_name: str = "<input>") -> ParseResult:
    tokens, lex_diags = _tokenize(source_text, file_name)
    result = ParseResult(diagnostics=list(lex_diags))
    _Parser(tokens, result).run()
    result.diagnostics.sort(key=lambda d: (d.loc, d.rule_id))
    return result


def parse_file(path: str | Path) -> ParseResult:
    """Parse a model file. Raises ``OSError`` if it cannot be read."""
    path = Path(path)
    data = path.read_bytes()
    return parse(data.decode("utf-8"), str(path))
