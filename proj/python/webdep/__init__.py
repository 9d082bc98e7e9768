"""Third-party DNS, CA and CDN dependency measurement."""

import os
from pathlib import Path

# Wheels carry the data files next to the module; source builds use the tree.
_packaged = Path(__file__).with_name("data")
if "WEBDEP_DATA_DIR" not in os.environ and (_packaged / "public_suffix_list.dat").exists():
    os.environ["WEBDEP_DATA_DIR"] = str(_packaged)

from ._core import (  # noqa: E402
    PublicSuffixList,
    WebdepError,
    classify,
    config_digest,
    default_data_dir,
    five_number_summary,
    ingest,
    normalize_dns_name,
    overlap_fraction,
    pearson,
    probe,
    report,
    snapshots,
    strength_label,
)

__all__ = [
    "PublicSuffixList",
    "WebdepError",
    "classify",
    "config_digest",
    "default_data_dir",
    "five_number_summary",
    "ingest",
    "normalize_dns_name",
    "overlap_fraction",
    "pearson",
    "probe",
    "report",
    "snapshots",
    "strength_label",
]
