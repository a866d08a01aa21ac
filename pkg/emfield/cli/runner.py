"""
Plumbing shared by the sub-commands: declared outputs, run records, scene
sources (single manifest or a batch directory).
"""

from argparse import ArgumentParser, Namespace
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional
import logging
import time

from emfield.core.errors import EXIT_OK, InvalidInputError
from emfield.models.field import ComplexField, ContrastMap
from emfield.models.grid import GridSpec
from emfield.models.manifest import SceneManifest
from emfield.models.report import ReconstructionReport, RunRecord, SolveReport
from emfield.models.scene import Scene
from emfield.physics.greens_operator import WKernel, build_w_kernel, incident_field
from emfield.physics.materials import contrast_from_materials
from emfield.services.batch_manager import BatchManager, discover_manifests
from emfield.services.dataset_io import atomic_write, load_manifest, load_scene

logger = logging.getLogger(__name__)

RUN_RECORD = "run_record.json"

KernelFactory = Callable[[GridSpec], WKernel]


class CommandRun:
    """
    One command invocation writing into out_dir. Outputs must be declared
    through output(); if the command fails every declared output is removed.
    """

    def __init__(self, command: str, out_dir: Path):
        self.command = command
        self.out_dir = Path(out_dir)
        self.outputs: List[Path] = []
        self.timings: Dict[str, float] = {}
        self._created_dir = False

    def __enter__(self) -> "CommandRun":
        if not self.out_dir.exists():
            self.out_dir.mkdir(parents=True)
            self._created_dir = True
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            logger.error(f"{self.command} failed, removing {len(self.outputs)} declared outputs")
            self.discard()
        return False

    def output(self, name: str) -> Path:
        path = self.out_dir / name
        self.outputs.append(path)
        return path

    @contextmanager
    def timed(self, label: str):
        started = time.perf_counter()
        try:
            yield
        finally:
            self.timings[label] = time.perf_counter() - started

    def finish(
        self,
        config: Dict[str, Any],
        input_digests: Optional[Dict[str, str]] = None,
        solve_report: Optional[SolveReport] = None,
        reconstruction_report: Optional[ReconstructionReport] = None,
    ) -> RunRecord:
        """Write run_record.json once every declared output exists"""
        record_path = self.output(RUN_RECORD)
        missing = [str(p) for p in self.outputs if p != record_path and not p.exists()]
        if missing:
            raise InvalidInputError(f"{self.command} did not produce declared outputs: {missing}")
        record = RunRecord(
            command=self.command,
            config=config,
            input_digests=input_digests or {},
            outputs=[str(p) for p in self.outputs],
            timings=self.timings,
            solve_report=solve_report,
            reconstruction_report=reconstruction_report,
        )
        atomic_write(record_path, record.model_dump_json(indent=2).encode("utf-8"))
        logger.info(f"{self.command}: wrote {len(self.outputs)} files to {self.out_dir}")
        return record

    def discard(self):
        for path in self.outputs:
            if path.exists():
                path.unlink()
        if self._created_dir and self.out_dir.exists() and not any(self.out_dir.iterdir()):
            self.out_dir.rmdir()


def add_scene_source(parser: ArgumentParser, batch: bool = False):
    """manifest positional, plus --manifest-dir for commands that support batch mode"""
    if batch:
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument("manifest", nargs="?", type=Path, help="scene manifest (KEY=value)")
        source.add_argument("--manifest-dir", type=Path, help="process every *.env manifest in a directory")
    else:
        parser.add_argument("manifest", type=Path, help="scene manifest (KEY=value)")


def add_output(parser: ArgumentParser, required: bool = True):
    if required:
        parser.add_argument("--out", type=Path, required=True, help="output directory")
    else:
        parser.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")


SceneProcessor = Callable[[Path, Path, KernelFactory], Dict[str, Any]]


def run_scene_command(args: Namespace, process: SceneProcessor) -> int:
    """Run one scene, or every manifest under --manifest-dir on the worker pool"""
    manifest_dir = getattr(args, "manifest_dir", None)
    if manifest_dir is None:
        process(args.manifest, args.out, build_w_kernel)
        return EXIT_OK

    manifests = discover_manifests(manifest_dir)
    if not manifests:
        raise InvalidInputError(f"no *.env manifests found under {manifest_dir}")
    with BatchManager() as manager:
        results = manager.run(
            lambda manifest, out_dir: process(manifest, out_dir, manager.kernel_for),
            manifests,
            args.out,
        )
    for result in results:
        status = result["status"].upper()
        print(f"{status:7s} {result['manifest']}" + (f"  ({result['error']})" if "error" in result else ""))
    return max((r["exit_code"] for r in results), default=EXIT_OK)


class PreparedScene(NamedTuple):
    manifest: SceneManifest
    scene: Scene
    kernel: WKernel
    contrast: ContrastMap
    incident: ComplexField


def prepare_scene(manifest_path: Path, kernel_for: KernelFactory = build_w_kernel) -> PreparedScene:
    """Manifest -> scene, W kernel, contrast and incident field"""
    manifest = load_manifest(manifest_path)
    scene = load_scene(manifest)
    kernel = kernel_for(scene.grid)
    return PreparedScene(
        manifest=manifest,
        scene=scene,
        kernel=kernel,
        contrast=contrast_from_materials(scene),
        incident=incident_field(scene),
    )
