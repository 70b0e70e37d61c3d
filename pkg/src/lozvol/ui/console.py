"""Human-readable summaries for the CLI. JSON and CSV files stay the machine-readable outputs."""

from typing import Iterable, Optional

from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from lozvol.errors import BoundCheckReport, Verdict

console = Console()

_VERDICT_STYLE = {Verdict.PASS: "green", Verdict.FAIL: "bold red", Verdict.SKIPPED: "dim"}


def _num(value: Optional[float], digits: int = 6) -> str:
    return "-" if value is None else f"{value:.{digits}g}"


def verdict_text(verdict: Verdict) -> Text:
    return Text(verdict.value, style=_VERDICT_STYLE[verdict])


def show_certificate(cert, check=None):
    table = Table(title="Lozanovskii weights", show_header=True, header_style="bold blue")
    table.add_column("i", justify="right")
    table.add_column("lambda_i", justify="right")
    for i, w in enumerate(cert.weights):
        table.add_row(str(i), f"{w:.12g}")
    console.print(table)
    lines = Text()
    lines.append(f"N(lambda) = {cert.norm_of_lambda:.12g}   sum log lambda = {cert.objective:.12g}\n")
    lines.append(f"KKT residual {cert.kkt_residual:.2e}, duality gap {cert.duality_gap:.2e} "
                 f"after {cert.iterations} steps ({cert.stop_reason})")
    if check is not None:
        lines.append(f"\nchecked {check.checked} points: left {check.left_ratio:.9f}, right {check.right_ratio:.9f} ")
        lines.append("ok" if check.passed else "FAILED", style="green" if check.passed else "bold red")
    console.print(Panel(lines, border_style="blue", padding=(0, 1)))


def show_enclosing(enclosing):
    table = Table(title="Enclosing cross-polytope", show_header=False)
    table.add_column("quantity", style="bold")
    table.add_column("value", justify="right")
    table.add_row("sigma", str(enclosing.selection.sigma))
    table.add_row("selection", enclosing.selection.method.value)
    table.add_row("|absconv{y}|", _num(enclosing.absconv_volume, 9))
    table.add_row("|B_E|", f"{enclosing.ball_volume.value:.9g} ({enclosing.ball_volume.method.value})")
    table.add_row("ratio", _num(enclosing.ratio, 9))
    table.add_row("bound (e n/k)^2", _num(enclosing.bound, 9))
    table.add_row("max gauge on boundary", f"{enclosing.containment_max_gauge:.9f}")
    console.print(table)


def show_verdicts(verdicts: Iterable[BoundCheckReport], title: str = "Verdicts"):
    table = Table(title=title, show_header=True, header_style="bold")
    for column in ("check", "lhs", "rhs", "margin", "min constant", "verdict"):
        table.add_column(column, justify="left" if column == "check" else "right")
    for v in verdicts:
        if v.verdict == Verdict.SKIPPED:
            table.add_row(v.name, "-", "-", "-", "-", verdict_text(v.verdict))
            continue
        table.add_row(v.name, _num(v.lhs, 9), _num(v.rhs, 9), _num(v.margin, 4),
                      _num(v.min_constant, 4), verdict_text(v.verdict))
    console.print(table)


def show_suite(result):
    table = Table(title=f"Suite ({len(result.rows)} instances)", show_header=True, header_style="bold")
    for column in ("name", "n", "k", "ratio", "bound", "L_K", "max section", "status"):
        table.add_column(column, justify="left" if column == "name" else "right")
    for row in result.rows:
        if row.error is not None:
            status = Text("ERROR", style="bold red")
        elif row.failed:
            status = Text(Verdict.FAIL.value, style="bold red")
        else:
            status = Text(Verdict.PASS.value, style="green")
        table.add_row(row.name, str(row.n), str(row.k), _num(row.ratio), _num(row.bound),
                      _num(row.L_K), _num(row.max_section), status)
    console.print(table)


def show_message(message: str, style: str = "yellow"):
    console.print(Text(message, style=style))
