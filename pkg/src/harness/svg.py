# svg.py
# 学习曲线 SVG 绘制 (不依赖绘图库)
#
# @date 26-10-18
#

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape, quoteattr

from src.errors import ContractError
from src.harness.csvlog import CurveRow


PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


@dataclass
class Curve:
    label: str
    rows:  list[CurveRow]


class SvgCanvas:
    """
    逐个元素拼接 SVG 文本
    """

    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.parts: list[str] = []

    def line(self, x1: float, y1: float, x2: float, y2: float, stroke: str = "#000", width: float = 1.0) -> None:
        self.parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" stroke="{stroke}" stroke-width="{width}"/>'
        )

    def polyline(self, points: Sequence[tuple[float, float]], stroke: str, width: float = 1.5) -> None:
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        self.parts.append(f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="{width}"/>')

    def polygon(self, points: Sequence[tuple[float, float]], fill: str, opacity: float = 0.2) -> None:
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        self.parts.append(f'<polygon points="{coords}" fill="{fill}" fill-opacity="{opacity}" stroke="none"/>')

    def rect(self, x: float, y: float, w: float, h: float, fill: str) -> None:
        self.parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" fill="{fill}"/>')

    def text(self, x: float, y: float, content: str, size: int = 12, anchor: str = "start", extra: str = "") -> None:
        self.parts.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" text-anchor="{anchor}" '
            f'font-family="sans-serif"{" " + extra if extra else ""}>{escape(content)}</text>'
        )

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="#ffffff"/>\n'
        )
        return head + "\n".join(self.parts) + "\n</svg>\n"


def _finite(values: Sequence[float]) -> list[float]:
    return [v for v in values if math.isfinite(v)]


def render_curves(curves: Sequence[Curve], width: int = 800, height: int = 500, title: str = "") -> str:
    """
    每条曲线画一条均值折线和一块 ±std 阴影带，附坐标轴与图例

    Raises:
        ContractError: 没有曲线或某条曲线为空
    """
    if not curves:
        raise ContractError("no curves to plot")
    if any(not c.rows for c in curves):
        raise ContractError("cannot plot an empty curve")

    left, right, top, bottom = 70.0, 180.0, 40.0, 50.0
    plot_w = width - left - right
    plot_h = height - top - bottom

    xs = [float(r.iteration) for c in curves for r in c.rows]
    lows = _finite([r.return_mean - r.return_std_over_seeds for c in curves for r in c.rows])
    highs = _finite([r.return_mean + r.return_std_over_seeds for c in curves for r in c.rows])
    x_min, x_max = min(xs), max(xs)
    y_min = min(lows) if lows else 0.0
    y_max = max(highs) if highs else 1.0
    if x_max - x_min <= 0:
        x_min, x_max = x_min - 0.5, x_max + 0.5
    if y_max - y_min <= 0:
        y_min, y_max = y_min - 0.5, y_max + 0.5

    def to_px(x: float, y: float) -> tuple[float, float]:
        px = left + (x - x_min) / (x_max - x_min) * plot_w
        py = top + plot_h - (y - y_min) / (y_max - y_min) * plot_h
        return px, py

    canvas = SvgCanvas(width, height)
    if title:
        canvas.text(width / 2, top / 2 + 6, title, size=15, anchor="middle")

    # 坐标轴
    canvas.line(left, top + plot_h, left + plot_w, top + plot_h)
    canvas.line(left, top, left, top + plot_h)
    for frac in (0.0, 0.5, 1.0):
        xv = x_min + frac * (x_max - x_min)
        yv = y_min + frac * (y_max - y_min)
        px, _ = to_px(xv, y_min)
        _, py = to_px(x_min, yv)
        canvas.text(px, top + plot_h + 16, f"{xv:g}", size=10, anchor="middle")
        canvas.text(left - 6, py + 4, f"{yv:.4g}", size=10, anchor="end")
    canvas.text(left + plot_w / 2, height - 12, "iteration", anchor="middle")
    canvas.text(18, top + plot_h / 2, "mean return", anchor="middle",
                extra=f"transform={quoteattr(f'rotate(-90 18 {top + plot_h / 2:.2f})')}")

    for i, curve in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        rows = [r for r in curve.rows if math.isfinite(r.return_mean)]
        upper = [to_px(r.iteration, r.return_mean + r.return_std_over_seeds) for r in rows
                 if math.isfinite(r.return_std_over_seeds)]
        lower = [to_px(r.iteration, r.return_mean - r.return_std_over_seeds) for r in rows
                 if math.isfinite(r.return_std_over_seeds)]
        if upper:
            canvas.polygon(upper + lower[::-1], fill=color)
        canvas.polyline([to_px(r.iteration, r.return_mean) for r in rows], stroke=color)

        # 图例
        ly = top + 10 + 20 * i
        canvas.rect(left + plot_w + 15, ly - 9, 14, 10, fill=color)
        canvas.text(left + plot_w + 35, ly, curve.label, size=11)

    return canvas.render()


__all__ = ["Curve", "SvgCanvas", "render_curves"]
