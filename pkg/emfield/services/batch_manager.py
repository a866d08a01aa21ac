from concurrent.futures import ThreadPoolExecutor, as_completed
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional
import logging
import threading

from emfield.core.config import settings
from emfield.core.errors import EmfieldError
from emfield.models.grid import GridSpec
from emfield.physics.greens_operator import WKernel, build_w_kernel

logger = logging.getLogger(__name__)

SceneJob = Callable[[Path, Path], Dict[str, Any]]


class BatchManager:
    """
    Runs one pipeline per scene manifest on a bounded worker pool.
    Each worker thread keeps its own Green's-kernel cache.
    """

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers or settings.worker_count()
        self.jobs: Dict[str, Dict[str, Any]] = {}
        self._local = threading.local()
        self._executor: Optional[ThreadPoolExecutor] = None

    def initialize(self):
        if self._executor is None:
            logger.info(f"Starting batch worker pool with {self.workers} workers")
            self._executor = ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix="emfield")

    def cleanup(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self):
        self.initialize()
        return self

    def __exit__(self, *exc):
        self.cleanup()

    def kernel_for(self, grid: GridSpec) -> WKernel:
        """Worker-local kernel cache keyed by grid"""
        cache = getattr(self._local, "kernels", None)
        if cache is None:
            cache = self._local.kernels = {}
        if grid not in cache:
            cache[grid] = build_w_kernel(grid)
        return cache[grid]

    def _run_one(self, job: SceneJob, manifest: Path, out_dir: Path) -> Dict[str, Any]:
        key = str(manifest)
        self.jobs[key] = {"manifest": key, "status": "processing", "started_at": datetime.now().isoformat()}
        try:
            result = job(manifest, out_dir)
            self.jobs[key].update(status="done", exit_code=0, outputs=result.get("outputs", []))
        except EmfieldError as e:
            logger.error(f"Error processing {manifest}: {e}")
            self.jobs[key].update(status="failed", exit_code=e.exit_code, error=str(e))
        except ValueError as e:
            logger.error(f"Invalid input in {manifest}: {e}")
            self.jobs[key].update(status="failed", exit_code=1, error=str(e))
        except OSError as e:
            logger.error(f"IO error processing {manifest}: {e}")
            self.jobs[key].update(status="failed", exit_code=2, error=str(e))
        self.jobs[key]["finished_at"] = datetime.now().isoformat()
        return self.jobs[key]

    def run(self, job: SceneJob, manifests: List[Path], out_root: Path) -> List[Dict[str, Any]]:
        """Process every manifest; each writes into out_root/<parent dir>-<manifest stem>"""
        self.initialize()
        futures = {
            self._executor.submit(self._run_one, job, m, Path(out_root) / f"{m.parent.name}-{m.stem}"): m
            for m in manifests
        }
        results = []
        for future in as_completed(futures):
            results.append(future.result())
        failed = sum(1 for r in results if r["status"] == "failed")
        logger.info(f"Batch finished: {len(results) - failed} succeeded, {failed} failed")
        return sorted(results, key=lambda r: r["manifest"])


def discover_manifests(directory: Path, pattern: str = "*.env") -> List[Path]:
    """Manifests directly inside a directory or one level down"""
    directory = Path(directory)
    found = sorted(directory.glob(pattern)) + sorted(directory.glob(f"*/{pattern}"))
    return found
