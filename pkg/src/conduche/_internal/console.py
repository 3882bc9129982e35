"""Terminal utilities for displaying validation output in the console."""

from __future__ import annotations

import platform
from collections.abc import Callable
from typing import TypeVar

COLORS_ENABLED = platform.system() != "Windows"

RESET = "\033[0m"
BOLD = "\033[1m"
GREEN = "\033[32m"
YELLOW = "\033[33m"
RED = "\033[31m"
BLUE = "\033[34m"
CYAN = "\033[36m"
MAGENTA = "\033[35m"


def styled_text(text: str, *styles: str) -> str:
    """Apply ANSI styles to text if colors are enabled.

    Args:
        text: The text to style
        *styles: ANSI style codes to apply

    Returns:
        The styled text, or the original text if colors are disabled
    """
    if not COLORS_ENABLED or not styles:
        return text
    return f"{''.join(styles)}{text}{RESET}"


T = TypeVar("T")


class TerminalUI:
    """Plain terminal output for reports and command results."""

    @staticmethod
    def header(title: str) -> None:
        """Print a boxed header.

        Args:
            title: The title to display
        """
        width = max(50, len(title) + 2)
        print(f"\n{styled_text('╔' + '═' * width + '╗', BLUE, BOLD)}")
        print(
            f"{styled_text('║', BLUE, BOLD)}{styled_text(title.center(width), CYAN, BOLD)}{styled_text('║', BLUE, BOLD)}"
        )
        print(f"{styled_text('╚' + '═' * width + '╝', BLUE, BOLD)}")

    @staticmethod
    def section(title: str) -> None:
        print(f"\n{styled_text(f'▓▒░ {title} ░▒▓', YELLOW, BOLD)}")

    @staticmethod
    def success(message: str) -> None:
        print(styled_text(f"✓ {message}", GREEN, BOLD))

    @staticmethod
    def info(message: str) -> None:
        print(styled_text(message, CYAN))

    @staticmethod
    def error(message: str) -> None:
        print(styled_text(f"✗ {message}", RED, BOLD))

    @staticmethod
    def warning(message: str) -> None:
        print(styled_text(f"⚠ {message}", YELLOW, BOLD))

    @staticmethod
    def box(title: str, messages: list[str], style: str = MAGENTA) -> None:
        """Print a box with a title and messages.

        Args:
            title: The box title
            messages: Lines shown inside the box
            style: ANSI style code for the box
        """
        width = max([len(title), *(len(m) for m in messages)]) + 4
        print(
            styled_text(f"┌─ {title} " + "─" * (width - len(title) - 4) + "┐", style, BOLD)
        )
        for msg in messages:
            print(styled_text(f"│ {msg}" + " " * (width - len(msg) - 2) + "│", style, BOLD))
        print(styled_text("└" + "─" * (width - 2) + "┘", style, BOLD))

    @staticmethod
    def table(
        items: list[T],
        formatter: Callable[[T], str],
        title: str = "Items",
        border_style: str = CYAN,
    ) -> None:
        """Print one formatted row per item.

        Args:
            items: Rows to display
            formatter: Function rendering a row
            title: Caption in the top border
            border_style: ANSI style code for the border
        """
        if not items:
            print(styled_text("No items to display", CYAN))
            return
        print(styled_text(f"╭─ {title} " + "─" * max(1, 45 - len(title)) + "╮", border_style))
        for item in items:
            print(f"{styled_text('│', border_style)} {formatter(item)}")
        print(styled_text("╰" + "─" * 48 + "╯", border_style))


console = TerminalUI()
