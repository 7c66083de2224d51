import json
import logging
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

from steerharvest.config import settings

logger = logging.getLogger(__name__)


def save_json_log(payload: Dict[str, Any], prefix: str) -> Optional[Path]:
    """Archive a run record as LOG/<prefix>_<UTC timestamp>_<uuid>.json; never raises."""
    if not settings.archive_runs:
        return None
    log_dir = Path(settings.log_dir)
    timestamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    path = log_dir / f"{prefix}_{timestamp}_{uuid.uuid4().hex}.json"
    try:
        log_dir.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, ensure_ascii=True, default=str), encoding="utf-8")
        logger.info("Saved JSON log: %s", path)
    except Exception as exc:  # pragma: no cover - log only
        logger.error("Failed to save JSON log: %s", exc)
        return None
    return path
