"""Minimal s-expression reader shared by the AVM and lexicon file formats.

Forms are parenthesized lists of symbols, quoted strings and nested lists.
Comments run from ``;`` to end of line.  Every node remembers the line it
started on so format errors can cite positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class SexprError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Sym:
    text: str
    line: int = 0


@dataclass(frozen=True)
class Str:
    text: str
    line: int = 0


@dataclass
class SList:
    items: list = field(default_factory=list)
    line: int = 0

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]


# Symbols may contain primes, hyphens, '+', '#', '(' is structural so the
# epenthetic "(r)" never appears inside lexicon source files themselves.
_SYMBOL_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-+'?#.")


def _tokenize(text: str):
    line = 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
        elif c in " \t\r":
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield (c, c, line)
            i += 1
        elif c == '"':
            start = line
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise SexprError("unterminated string", start)
                buf.append(text[j])
                j += 1
            if j >= n:
                raise SexprError("unterminated string", start)
            yield ("str", "".join(buf), start)
            i = j + 1
        elif c in _SYMBOL_CHARS:
            j = i
            while j < n and text[j] in _SYMBOL_CHARS:
                j += 1
            yield ("sym", text[i:j], line)
            i = j
        else:
            raise SexprError(f"unexpected character {c!r}", line)


def read_all(text: str) -> list:
    """Parse ``text`` into a list of top-level s-expression nodes."""
    stack: list[SList] = []
    top: list = []
    for kind, value, line in _tokenize(text):
        if kind == "(":
            node = SList([], line)
            if stack:
                stack[-1].items.append(node)
            else:
                top.append(node)
            stack.append(node)
        elif kind == ")":
            if not stack:
                raise SexprError("unbalanced ')'", line)
            stack.pop()
        else:
            node = Sym(value, line) if kind == "sym" else Str(value, line)
            if stack:
                stack[-1].items.append(node)
            else:
                top.append(node)
    if stack:
        raise SexprError("unclosed '('", stack[-1].line)
    return top
