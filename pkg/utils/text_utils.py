#!/usr/bin/env python3
"""
Text Utilities - Source preprocessing for .eff programs
"""

import re
from dataclasses import dataclass, field
from typing import List, Tuple

# Unicode spellings accepted in specs, rewritten to the ASCII the grammar reads
SYMBOL_REPLACEMENTS = {
    '∀': 'forall ',
    '∃': 'exists ',
    '∧': '/\\',
    '∨': '\\/',
    '⇒': '==>',
    '→': '->',
    '¬': '~',
    '≤': '<=',
    '≥': '>=',
    '≠': '<>',
    'λ': 'fun ',
    '⊤': 'true',
    '⊥': 'false',
}


class SourceError(ValueError):
    """Unterminated comment in a source file"""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} at line {line}, column {column}")


@dataclass
class PreprocessedSource:
    """
    Cleaned source text plus a map back to the original positions

    Attributes:
        text: Text handed to the parser
        origins: For each character of text, its offset in the original
        original: The original text
    """
    text: str
    origins: List[int] = field(default_factory=list)
    original: str = ""

    def position(self, offset: int) -> Tuple[int, int]:
        """(line, column), 1-based, in the original text of an offset into text"""
        if not self.origins:
            return 1, 1
        offset = max(0, min(offset, len(self.origins) - 1))
        return line_column(self.original, self.origins[offset])

    def position_of(self, line: int, column: int) -> Tuple[int, int]:
        """Map a (line, column) of text back to the original"""
        return self.position(offset_of(self.text, line, column))


def line_column(text: str, offset: int) -> Tuple[int, int]:
    line = text.count('\n', 0, offset) + 1
    start = text.rfind('\n', 0, offset) + 1
    return line, offset - start + 1


def offset_of(text: str, line: int, column: int) -> int:
    offset = 0
    for _ in range(line - 1):
        nxt = text.find('\n', offset)
        if nxt < 0:
            return len(text)
        offset = nxt + 1
    return offset + column - 1


class SourcePreprocessor:
    """
    Utilities for preparing program text for the parser
    """

    @staticmethod
    def strip_comments(text: str) -> Tuple[str, List[int]]:
        """
        Blank out (* ... *) comments (nested) and // line comments

        Newlines inside comments are kept so line numbers survive.

        Raises:
            SourceError: Unterminated comment
        """
        out: List[str] = []
        origins: List[int] = []
        depth = 0
        opened = 0
        i = 0
        n = len(text)
        while i < n:
            two = text[i:i + 2]
            if two == '(*':
                if depth == 0:
                    opened = i
                depth += 1
                out.append('  ')
                origins += [i, i + 1]
                i += 2
                continue
            if depth and two == '*)':
                depth -= 1
                out.append('  ')
                origins += [i, i + 1]
                i += 2
                continue
            if not depth and two == '//':
                end = text.find('\n', i)
                end = n if end < 0 else end
                out.append(' ' * (end - i))
                origins += list(range(i, end))
                i = end
                continue
            ch = text[i]
            out.append(ch if not depth or ch == '\n' else ' ')
            origins.append(i)
            i += 1
        if depth:
            line, column = line_column(text, opened)
            raise SourceError("unterminated comment", line, column)
        return ''.join(out), origins

    @staticmethod
    def replace_symbols(text: str, origins: List[int]) -> Tuple[str, List[int]]:
        """Rewrite unicode logic symbols to their ASCII spelling"""
        out: List[str] = []
        new_origins: List[int] = []
        for ch, origin in zip(text, origins):
            replacement = SYMBOL_REPLACEMENTS.get(ch, ch)
            out.append(replacement)
            new_origins += [origin] * len(replacement)
        return ''.join(out), new_origins

    @staticmethod
    def normalize_newlines(text: str) -> str:
        return re.sub(r'\r\n?', '\n', text).replace('\t', '    ')

    @staticmethod
    def preprocess(text: str) -> PreprocessedSource:
        """
        Full preprocessing pipeline for a program

        Args:
            text: Raw program text

        Returns:
            PreprocessedSource whose positions map back to text
        """
        original = SourcePreprocessor.normalize_newlines(text)
        cleaned, origins = SourcePreprocessor.strip_comments(original)
        cleaned, origins = SourcePreprocessor.replace_symbols(cleaned, origins)
        return PreprocessedSource(cleaned, origins, original)


# Example usage
if __name__ == "__main__":
    sample = "(* duplicate (* nested *) *)\nlet f () : Pure int (fun p -> ∀x. p x) = 1\n"
    source = SourcePreprocessor.preprocess(sample)
    print(repr(source.text))
    print(source.position_of(2, 34))
