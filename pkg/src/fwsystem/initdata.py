"""Initial-data mini-language.

Expressions are arithmetic over numbers, ``x``, ``pi`` and the functions
``sin``, ``cos``, ``exp`` and ``gauss(x0, w)``, e.g.
``"1 + 0.5*cos(2*x) - 0.2*gauss(0, 0.5)"``.  ``gauss(x0, w)`` is the
periodic Gaussian ``sum_j exp(-((x - x0 - 2 L j)/w)^2)``, summed over
images until the next pair contributes less than ``1e-14``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .spectral import Field, Grid

IMAGE_TOL = 1e-14
MAX_IMAGES = 10_000

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))")


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(src: str) -> list[_Tok]:
    out = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            bad = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise ParseError(f"unexpected character {src[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        out.append(_Tok(kind, m.group(kind), start))
        pos = m.end()
    out.append(_Tok("end", "", len(src)))
    return out


def periodic_gaussian(x, x0: float, w: float, half_period: float, tol: float = IMAGE_TOL):
    """Periodic Gaussian and the number of image pairs used.

    Returns ``(values, n_pairs, tail)`` where ``tail`` is the largest value
    contributed by the last pair added.
    """
    if not w > 0:
        raise ValueError("gauss width must be positive")
    x = np.asarray(x, dtype=float)
    period = 2.0 * half_period
    # centre the bump in the domain so images are symmetric
    d = (x - x0 + half_period) % period - half_period
    total = np.exp(-(d / w) ** 2)
    j = 0
    tail = float(np.max(total))
    while j < MAX_IMAGES:
        j += 1
        pair = np.exp(-((d - period * j) / w) ** 2) + np.exp(-((d + period * j) / w) ** 2)
        total = total + pair
        tail = float(np.max(pair))
        if tail < tol:
            break
    return total, j, tail


class _Parser:
    def __init__(self, src: str, grid: Grid):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        self.grid = grid

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str):
        t = self.take()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.pos)

    def parse(self):
        if self.peek().kind == "end":
            raise ParseError("empty expression", 0)
        v = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected token {t.text!r}", t.pos)
        return v

    def expr(self):
        v = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            r = self.term()
            v = v + r if op == "+" else v - r
        return v

    def term(self):
        v = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            r = self.unary()
            v = v * r if op == "*" else v / r
        return v

    def unary(self):
        if self.peek().text in ("+", "-"):
            op = self.take().text
            v = self.unary()
            return -v if op == "-" else v
        return self.power()

    def power(self):
        v = self.atom()
        if self.peek().text == "^":
            self.take()
            v = v ** self.unary()
        return v

    def atom(self):
        t = self.take()
        if t.kind == "num":
            return float(t.text)
        if t.text == "(":
            v = self.expr()
            self.expect(")")
            return v
        if t.kind == "name":
            if t.text == "x":
                return self.grid.x.copy()
            if t.text == "pi":
                return np.pi
            if t.text in ("sin", "cos", "exp", "gauss"):
                self.expect("(")
                args = [self.expr()]
                while self.peek().text == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                return self.call(t, args)
            raise ParseError(f"unknown name {t.text!r}", t.pos)
        raise ParseError(f"unexpected token {t.text or 'end of input'!r}", t.pos)

    def call(self, t: _Tok, args):
        name = t.text
        if name == "gauss":
            if len(args) != 2 or np.ndim(args[0]) or np.ndim(args[1]):
                raise ParseError("gauss takes two constant arguments (x0, w)", t.pos)
            if not float(args[1]) > 0:
                raise ParseError("gauss width must be positive", t.pos)
            vals, _, _ = periodic_gaussian(self.grid.x, float(args[0]), float(args[1]), self.grid.half_period)
            return vals
        if len(args) != 1:
            raise ParseError(f"{name} takes one argument", t.pos)
        return getattr(np, name)(args[0])


def evaluate_constant(expr: str) -> float:
    """Evaluate an ``x``-free expression such as ``"4*pi"``."""
    v = _Parser(expr, Grid(1.0, 8)).parse()
    if np.ndim(v):
        raise ParseError("expression must not depend on x", 0)
    return float(v)


def init_expression(expr: str, grid: Grid) -> Field:
    v = _Parser(str(expr), grid).parse()
    return Field(grid, np.broadcast_to(np.asarray(v, dtype=float), grid.x.shape))


def slope_profile(grid: Grid, m0: float = -3.0, M0: float = 0.5) -> Field:
    """Zero-mean periodic ``u0`` whose slope has extrema ``m0 < 0 < M0``.

    ``u0' = M0 - (M0 - m0) g`` with ``g`` a periodic Gaussian of peak 1,
    its width chosen so that ``u0'`` has zero mean.  ``u0`` is recovered by
    spectral integration.  The extrema hold up to the Gaussian's overlap
    with its periodic images (negligible for narrow bumps).
    """
    if not (m0 < 0.0 < M0):
        raise ValueError("need m0 < 0 < M0")
    drop = M0 - m0
    # mean of a unit-peak Gaussian exp(-x^2/(2 s^2)) over the period is s sqrt(2 pi) / (2L)
    sigma = M0 * grid.length / (drop * np.sqrt(2.0 * np.pi))
    g, _, _ = periodic_gaussian(grid.x, 0.0, np.sqrt(2.0) * sigma, grid.half_period)
    slope = drop * np.mean(g) - drop * g
    sh = np.fft.rfft(slope)
    k = grid.k.copy()
    k[0] = 1.0
    uh = np.where(grid.k > 0, sh / (1j * k), 0.0)
    return Field(grid, np.fft.irfft(uh, n=grid.n_points))
