#!/usr/bin/env python3
"""
Study configuration for the biharmonic CLI
Loads an optional .env file, parses N/k lists and validates a run.
"""
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = 'BIHARMONIC_OUTPUT_DIR'
FORMATS = ('csv', 'json')
FORCINGS = ('zero', 'const24', 'cos2pi', 'file')
PROFILES = ('quartic', 'sine2', 'file')
KERNEL_MODES = ('matrix', 'probe')
FAULTS = ('kernel-sign',)


def load_env_file(env_file: Optional[Path] = None) -> List[str]:
    """
    Load KEY=VALUE lines into os.environ without overriding variables already set

    Args:
        env_file: Path to the file (defaults to .env next to this module)

    Returns:
        Names of the variables that were loaded
    """
    env_file = env_file or Path(__file__).parent / '.env'
    loaded = []
    if not env_file.exists():
        return loaded
    with open(env_file) as f:
        for line in f:
            line = line.strip()
            if line and not line.startswith('#') and '=' in line:
                key, value = line.split('=', 1)
                key, value = key.strip(), value.strip().strip('"').strip("'")
                if key not in os.environ:
                    os.environ[key] = value
                    loaded.append(key)
    if loaded:
        logger.debug(f"Loaded {', '.join(loaded)} from {env_file}")
    return loaded


def parse_int_list(text: str) -> List[int]:
    """
    Parse '10,20,30', '10..60' or '4..16:4' into a sorted list of unique ints

    In 'a..b' the step defaults to a, so '10..60' means 10,20,...,60.
    """
    values = set()
    for part in str(text).split(','):
        part = part.strip()
        if not part:
            continue
        try:
            if '..' in part:
                start_text, rest = part.split('..', 1)
                end_text, _, step_text = rest.partition(':')
                start, end = int(start_text), int(end_text)
                step = int(step_text) if step_text else start
                if step <= 0 or end < start:
                    raise ValueError
                values.update(range(start, end + 1, step))
            else:
                values.add(int(part))
        except ValueError:
            raise ValueError(f"Invalid integer list entry: {part!r}")
    if not values:
        raise ValueError(f"Empty integer list: {text!r}")
    return sorted(values)


@dataclass
class StudyConfig:
    """Everything one CLI run needs"""
    command: str
    n_list: List[int] = field(default_factory=lambda: [16])
    k_list: List[int] = field(default_factory=lambda: [1])
    forcing: str = 'const24'
    profile: str = 'quartic'
    input_file: Optional[str] = None
    output: Optional[str] = None
    fmt: str = 'csv'
    seed: int = 0
    slope_band: Tuple[float, float] = (-4.3, -3.7)
    tolerance_scale: float = 1.0
    points: int = 101
    kernel_mode: str = 'matrix'
    resolution: int = 64
    tail_terms: int = 200
    inject_fault: Optional[str] = None
    verbosity: int = 0

    def validate(self) -> "StudyConfig":
        """Raise ValueError on the first invalid field"""
        if any(n < 2 for n in self.n_list):
            raise ValueError(f"N values must be >= 2, got {self.n_list}")
        if any(k < 1 for k in self.k_list):
            raise ValueError(f"k values must be >= 1, got {self.k_list}")
        if self.fmt not in FORMATS:
            raise ValueError(f"Format must be one of {FORMATS}, got {self.fmt!r}")
        if self.forcing not in FORCINGS:
            raise ValueError(f"Forcing must be one of {FORCINGS}, got {self.forcing!r}")
        if self.profile not in PROFILES:
            raise ValueError(f"Profile must be one of {PROFILES}, got {self.profile!r}")
        if (self.forcing == 'file' or self.profile == 'file') and self.command in ('solve', 'spline') \
                and not self.input_file:
            raise ValueError("Input from file requires --input")
        if self.kernel_mode not in KERNEL_MODES:
            raise ValueError(f"Kernel mode must be one of {KERNEL_MODES}, got {self.kernel_mode!r}")
        if self.inject_fault is not None and self.inject_fault not in FAULTS:
            raise ValueError(f"Unknown fault {self.inject_fault!r}, expected one of {FAULTS}")
        low, high = self.slope_band
        if not low < high:
            raise ValueError(f"Slope band must satisfy low < high, got {self.slope_band}")
        if self.tolerance_scale <= 0:
            raise ValueError(f"Tolerance scale must be positive, got {self.tolerance_scale}")
        if self.points < 2 or self.resolution < 2:
            raise ValueError("Sample counts must be >= 2")
        if self.tail_terms < 100:
            raise ValueError(f"Tail terms must be >= 100, got {self.tail_terms}")
        return self

    def output_path(self) -> Optional[Path]:
        """Output file, resolved against BIHARMONIC_OUTPUT_DIR when relative"""
        if not self.output:
            return None
        path = Path(self.output)
        base = os.environ.get(OUTPUT_DIR_ENV)
        if base and not path.is_absolute():
            path = Path(base) / path
        return path
