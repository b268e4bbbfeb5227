"""
File management for experiment outputs: timestamped run folders with rotation.
"""

import logging
import os
import shutil
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

TIMESTAMP_FORMAT = '%Y%m%d_%H%M%S'


class FileManager:
    """Places solution documents, sweep CSVs and reports under per-run folders."""

    def __init__(self, config: Dict[str, Any], timestamp: Optional[str] = None):
        """
        Initialize the FileManager.

        Args:
            config: The `output` section of config.yaml
            timestamp: Run folder name; defaults to the current time
        """
        self.config = config or {}
        self.solutions_dir = self.config.get('solutions_dir', 'output/solutions')
        self.sweeps_dir = self.config.get('sweeps_dir', 'output/sweeps')
        self.report_dir = self.config.get('report_dir', 'output/reports')
        self.files_rotate = self.config.get('files_rotate', 5)
        self.timestamp = timestamp or datetime.now().strftime(TIMESTAMP_FORMAT)

    def _is_timestamp_format(self, folder_name: str) -> bool:
        """Check if folder name matches timestamp format YYYYMMDD_HHMMSS."""
        try:
            datetime.strptime(folder_name, TIMESTAMP_FORMAT)
            return True
        except ValueError:
            return False

    def _rotate_folders(self, base_dir: str) -> None:
        """Delete the oldest timestamped folders so that a new one keeps the count at files_rotate."""
        if not os.path.exists(base_dir):
            return

        timestamped_dirs = sorted(
            item for item in os.listdir(base_dir)
            if os.path.isdir(os.path.join(base_dir, item)) and self._is_timestamp_format(item)
        )
        if self.timestamp in timestamped_dirs:
            return
        while timestamped_dirs and len(timestamped_dirs) >= self.files_rotate:
            oldest = os.path.join(base_dir, timestamped_dirs.pop(0))
            logger.info(f"🗑️ Rotating out old folder: {oldest}")
            self._delete_directory_with_retry(oldest)

    def _delete_directory_with_retry(self, directory: str, max_retries: int = 3) -> None:
        """Delete a directory, retrying when another process holds a file open."""
        for attempt in range(max_retries):
            try:
                shutil.rmtree(directory)
                return
            except PermissionError as e:
                if attempt < max_retries - 1:
                    time.sleep(1)
                else:
                    logger.warning(f"⚠️ Could not delete {directory} after {max_retries} attempts: {e}")
            except OSError as e:
                logger.warning(f"⚠️ Unexpected error deleting {directory}: {e}")
                return

    def run_dir(self, base_dir: str) -> Path:
        """The timestamped folder of this run under base_dir, created after rotation."""
        os.makedirs(base_dir, exist_ok=True)
        self._rotate_folders(base_dir)
        target = Path(base_dir) / self.timestamp
        target.mkdir(parents=True, exist_ok=True)
        return target

    def solution_path(self, name: str) -> Path:
        return self.run_dir(self.solutions_dir) / f"{name}.json"

    def sweep_path(self, name: str) -> Path:
        return self.run_dir(self.sweeps_dir) / f"{name}.csv"

    def report_path(self) -> Path:
        return self.run_dir(self.report_dir)
