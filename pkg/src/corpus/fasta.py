"""FASTA and site-annotation readers and writers."""
import re
from pathlib import Path
from typing import Optional

from src.corpus.types import ProteinRecord, SiteAnnotation, SiteLabel, Species
from src.config.logging import get_logger
from src.errors import DataError

logger = get_logger(__name__)

# Header layout: ">id [free text] [species=<name>]"
SPECIES_PATTERN = re.compile(r"(?:^|\s)species=(\S+)")
LINE_WIDTH = 60


def parse_fasta(text: str, default_species: Optional[Species] = None) -> list[ProteinRecord]:
    """Parse FASTA text into protein records.

    Sequence lines are concatenated and uppercased; whitespace and a trailing
    ``*`` are dropped. Letters outside the 20-letter alphabet are kept and
    reported through ``ProteinRecord.has_unknown``.

    Args:
        text: FASTA content
        default_species: Species for headers without a ``species=`` tag

    Returns:
        Records in file order

    Raises:
        DataError: On empty input, sequence data before the first header,
            duplicate ids, empty records or unknown species names
    """
    if not text or not text.strip():
        raise DataError("empty FASTA input")

    records: list[ProteinRecord] = []
    seen: set[str] = set()
    header: Optional[str] = None
    chunks: list[str] = []
    header_line = 0

    def flush() -> None:
        if header is None:
            return
        records.append(_build_record(header, "".join(chunks), default_species, header_line))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            flush()
            header = line[1:].strip()
            record_id = header.split()[0] if header else ""
            if not record_id:
                raise DataError(f"line {lineno}: header without an id")
            if record_id in seen:
                raise DataError(f"line {lineno}: duplicate protein id {record_id!r}")
            seen.add(record_id)
            chunks = []
            header_line = lineno
        else:
            if header is None:
                raise DataError(f"line {lineno}: sequence data before any header")
            chunks.append(re.sub(r"\s+", "", line).upper())
    flush()

    flagged = sum(1 for r in records if r.has_unknown)
    logger.info("fasta_parsed", records=len(records), with_unknown_residues=flagged)
    return records


def _build_record(header: str, residues: str, default_species: Optional[Species], lineno: int) -> ProteinRecord:
    record_id, _, rest = header.partition(" ")
    species = default_species
    match = SPECIES_PATTERN.search(rest)
    if match:
        try:
            species = Species.parse(match.group(1))
        except ValueError as e:
            raise DataError(f"line {lineno}: {e}") from e
        rest = SPECIES_PATTERN.sub(" ", rest)
    residues = residues.rstrip("*")
    if not residues:
        raise DataError(f"line {lineno}: protein {record_id!r} has no residues")
    return ProteinRecord(id=record_id, residues=residues, species=species, description=" ".join(rest.split()))


def serialize_fasta(records: list[ProteinRecord]) -> str:
    """Write records as FASTA; ``parse_fasta`` reads the output back unchanged."""
    lines: list[str] = []
    for record in records:
        header = [f">{record.id}"]
        if record.description:
            header.append(record.description)
        if record.species is not None:
            header.append(f"species={record.species.name}")
        lines.append(" ".join(header))
        for start in range(0, len(record.residues), LINE_WIDTH):
            lines.append(record.residues[start:start + LINE_WIDTH])
    return "\n".join(lines) + "\n"


def read_fasta(path: Path, default_species: Optional[Species] = None) -> list[ProteinRecord]:
    """Read a FASTA file (UTF-8)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read FASTA file {path}: {e}") from e
    return parse_fasta(text, default_species=default_species)


def parse_annotations(text: str) -> list[SiteAnnotation]:
    """Parse ``protein_id \\t position \\t label`` rows.

    Blank lines, ``#`` comments and a leading ``protein_id`` header row are
    skipped. Labels accept ``positive``/``negative``, ``1``/``0`` and
    ``K-Ace``/``non-K-Ace``.

    Raises:
        DataError: On malformed rows
    """
    annotations: list[SiteAnnotation] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if lineno == 1 and fields[0].lower() == "protein_id":
            continue
        if len(fields) != 3:
            raise DataError(f"annotation line {lineno}: expected 3 tab-separated fields, got {len(fields)}")
        protein_id, position, label = (f.strip() for f in fields)
        try:
            annotations.append(SiteAnnotation(protein_id, int(position), SiteLabel.parse(label)))
        except ValueError as e:
            raise DataError(f"annotation line {lineno}: {e}") from e
    logger.info(
        "annotations_parsed",
        rows=len(annotations),
        positives=sum(1 for a in annotations if a.label is SiteLabel.POSITIVE),
    )
    return annotations


def read_annotations(path: Path) -> list[SiteAnnotation]:
    """Read an annotation file (UTF-8)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read annotation file {path}: {e}") from e
    return parse_annotations(text)
