#!/usr/bin/env python3
"""
Report generator for sweep runs.
"""

import json
import logging
import math
import platform
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Dict, List, Sequence

from .sweep_runner import SweepRow, summarize

logger = logging.getLogger(__name__)


class SweepReportGenerator:
    """Writes a Markdown summary and a settings snapshot for a sweep."""

    def __init__(self, report_dir: str = "output/reports"):
        """
        Initialize the report generator.

        Args:
            report_dir: Directory to save reports
        """
        self.report_dir = Path(report_dir)

    def generate_report(
        self,
        rows: Sequence[SweepRow],
        config: Dict[str, Any],
        start_time: datetime,
        end_time: datetime,
        csv_path: str = "",
    ) -> str:
        """
        Generate the sweep report.

        Args:
            rows: Sweep results
            config: Settings used (config.yaml contents plus the effective scenario)
            start_time: When the sweep started
            end_time: When the sweep ended
            csv_path: Where the rows were written

        Returns:
            Path to the Markdown summary
        """
        self.report_dir.mkdir(parents=True, exist_ok=True)
        timestamp = start_time.strftime('%Y%m%d_%H%M%S')

        summary_file = self._generate_summary_report(rows, start_time, end_time, timestamp, csv_path)
        config_file = self._save_config_snapshot(config, timestamp)

        logger.info(f"📊 Generated sweep report: {summary_file}")
        logger.info(f"📄 Settings snapshot: {config_file}")
        return str(summary_file)

    def _generate_summary_report(
        self,
        rows: Sequence[SweepRow],
        start_time: datetime,
        end_time: datetime,
        timestamp: str,
        csv_path: str,
    ) -> Path:
        """Generate the main summary report in Markdown format."""
        summary = summarize(rows)
        schemes = list(dict.fromkeys(row.scheme for row in rows))
        values = list(dict.fromkeys(row.value for row in rows))
        seeds = sorted({row.seed for row in rows})
        axis = rows[0].axis.value if rows else "n/a"
        infeasible = sum(1 for row in rows if not row.feasible)

        system_info = {
            'platform': platform.system(),
            'platform_version': platform.version(),
            'python_version': platform.python_version(),
            'machine': platform.machine()
        }

        report_content = f"""# Sweep Report

Generated: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}

## Executive Summary

- **Axis:** {axis}
- **Values:** {', '.join(self._format_value(v) for v in values)}
- **Seeds:** {self._format_seeds(seeds)}
- **Schemes:** {', '.join(s.value for s in schemes)}
- **Start Time:** {start_time.strftime('%Y-%m-%d %H:%M:%S')}
- **Total Duration:** {self._format_duration(end_time - start_time)}
- **Rows:** {len(rows)} ({infeasible} infeasible)
- **CSV:** `{csv_path}`

## Mean Latency (s)

"""
        report_content += self._table(schemes, values, summary, 'mean_objective', "{:.6g}")
        report_content += "\n## Feasibility Rate (%)\n\n"
        report_content += self._table(schemes, values, summary, 'feasible_rate', "{:.1f}", scale=100.0)
        report_content += "\n## Mean Wall Time (ms)\n\n"
        report_content += self._table(schemes, values, summary, 'mean_wall_ms', "{:.1f}")

        regenerations = {value: 0 for value in values}
        if schemes:
            for value in values:
                regenerations[value] = summary[(schemes[0], value)]['regenerations']
        report_content += "\n## Instance Regenerations\n\n"
        report_content += "| Value | Regenerations |\n|---|---|\n"
        for value in values:
            report_content += f"| {self._format_value(value)} | {regenerations[value]} |\n"

        report_content += f"""
## System Information

- **Platform:** {system_info['platform']} {system_info['platform_version']}
- **Python Version:** {system_info['python_version']}
- **Architecture:** {system_info['machine']}
"""

        report_file = self.report_dir / f"sweep_summary_{timestamp}.md"
        with open(report_file, 'w', encoding='utf-8') as f:
            f.write(report_content)
        return report_file

    def _table(self, schemes, values, summary, key: str, fmt: str, scale: float = 1.0) -> str:
        header = "| Scheme | " + " | ".join(self._format_value(v) for v in values) + " |\n"
        header += "|---|" + "---|" * len(values) + "\n"
        body = ""
        for scheme in schemes:
            cells = []
            for value in values:
                number = summary[(scheme, value)][key]
                cells.append("inf" if math.isinf(number) else fmt.format(number * scale))
            body += f"| {scheme.value} | " + " | ".join(cells) + " |\n"
        return header + body

    def _save_config_snapshot(self, config: Dict[str, Any], timestamp: str) -> Path:
        """Save configuration snapshot."""
        config_file = self.report_dir / f"config_snapshot_{timestamp}.json"
        with open(config_file, 'w', encoding='utf-8') as f:
            json.dump(config, f, indent=2, default=str)
        return config_file

    def _format_value(self, value: float) -> str:
        return f"{value:g}"

    def _format_seeds(self, seeds: List[int]) -> str:
        if seeds and seeds == list(range(seeds[0], seeds[-1] + 1)):
            return f"{seeds[0]}..{seeds[-1]} ({len(seeds)})"
        return ", ".join(str(s) for s in seeds)

    def _format_duration(self, duration: timedelta) -> str:
        """Format duration in a human-readable way."""
        total_seconds = int(duration.total_seconds())
        hours = total_seconds // 3600
        minutes = (total_seconds % 3600) // 60
        seconds = total_seconds % 60

        if hours > 0:
            return f"{hours}h {minutes}m {seconds}s"
        elif minutes > 0:
            return f"{minutes}m {seconds}s"
        else:
            return f"{seconds}s"
