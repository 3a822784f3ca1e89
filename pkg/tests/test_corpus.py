"""Tests for FASTA parsing, windowing, redundancy reduction and splitting."""
import pytest

from src.corpus import (
    TABLE1_COUNTS,
    DatasetValidator,
    Origin,
    PeptideWindow,
    ProteinRecord,
    SiteAnnotation,
    SiteLabel,
    Species,
    SpeciesDataset,
    extract_windows,
    parse_annotations,
    parse_fasta,
    reduce_redundancy,
    resolve_sites,
    sequence_identity,
    serialize_fasta,
    split_train_independent,
)
from src.corpus.io import format_summary, format_windows, parse_windows
from src.errors import DataError

from conftest import make_motif_proteome, make_motif_windows


class TestFasta:
    """Test FASTA and annotation parsing."""

    def test_parse_multiline_record(self):
        """Test sequence lines are joined, uppercased and stripped of a stop."""
        records = parse_fasta(">P1 some protein species=E_COLI\nmkla\nGKT*\n")
        assert len(records) == 1
        assert records[0].id == "P1"
        assert records[0].residues == "MKLAGKT"
        assert records[0].species is Species.E_COLI
        assert records[0].description == "some protein"

    def test_default_species(self):
        """Test headers without a tag take the default species."""
        records = parse_fasta(">P1\nMK\n", default_species=Species.B_SUBTILIS)
        assert records[0].species is Species.B_SUBTILIS

    def test_unknown_letters_flagged(self):
        """Test letters outside the alphabet are kept and reported."""
        record = parse_fasta(">P1\nMKBZ\n")[0]
        assert record.has_unknown
        assert record.unknown_positions == [3, 4]

    @pytest.mark.parametrize(
        "text",
        ["", "MKL\n>P1\nMK\n", ">P1\nMK\n>P1\nMK\n", ">P1\n\n>P2\nMK\n", ">P1 species=Martian\nMK\n"],
    )
    def test_malformed_input(self, text):
        """Test malformed FASTA raises DataError."""
        with pytest.raises(DataError):
            parse_fasta(text)

    def test_serialize_round_trip(self):
        """Test serialized records parse back unchanged."""
        records = [
            ProteinRecord("A1", "MK" * 70, Species.E_COLI, "first"),
            ProteinRecord("A2", "GGKGG", Species.S_ERIOCHEIRIS),
        ]
        assert parse_fasta(serialize_fasta(records)) == records

    def test_parse_annotations(self):
        """Test header, comment and label spellings are handled."""
        text = "protein_id\tposition\tlabel\n# comment\nP1\t2\tpositive\nP1\t5\t0\nP2\t3\tK-Ace\n"
        rows = parse_annotations(text)
        assert rows == [
            SiteAnnotation("P1", 2, SiteLabel.POSITIVE),
            SiteAnnotation("P1", 5, SiteLabel.NEGATIVE),
            SiteAnnotation("P2", 3, SiteLabel.POSITIVE),
        ]

    def test_malformed_annotation(self):
        """Test a row with a non-integer position raises DataError."""
        with pytest.raises(DataError):
            parse_annotations("P1\tx\tpositive\n")


class TestWindows:
    """Test window extraction around lysines."""

    def test_interior_window(self):
        """Test a window far from both termini has no padding."""
        residues = "A" * 30 + "K" + "C" * 30
        protein = ProteinRecord("P", residues, Species.E_COLI)
        window = extract_windows(protein, [SiteAnnotation("P", 31, SiteLabel.POSITIVE)])[0]
        assert window.residues == "A" * 20 + "K" + "C" * 20
        assert window.origin == Origin("P", 31)

    def test_n_terminal_padding(self):
        """Test a lysine at position 1 is padded on the left."""
        protein = ProteinRecord("P", "K" + "A" * 25, Species.E_COLI)
        window = extract_windows(protein, [SiteAnnotation("P", 1, SiteLabel.NEGATIVE)])[0]
        assert window.residues == "X" * 20 + "K" + "A" * 20
        assert DatasetValidator.padding_is_terminal(window.residues)

    def test_short_protein_padded_both_sides(self):
        """Test a short protein is padded at both ends."""
        protein = ProteinRecord("P", "AKA", Species.E_COLI)
        window = extract_windows(protein, [SiteAnnotation("P", 2, SiteLabel.POSITIVE)])[0]
        assert window.residues == "X" * 19 + "AKA" + "X" * 19
        assert len(window.residues) == 41

    def test_non_lysine_site_rejected(self):
        """Test a site on a non-K residue raises DataError."""
        protein = ProteinRecord("P", "AKA", Species.E_COLI)
        with pytest.raises(DataError):
            extract_windows(protein, [SiteAnnotation("P", 1, SiteLabel.POSITIVE)])

    def test_out_of_range_site_rejected(self):
        """Test a position past the end raises DataError."""
        protein = ProteinRecord("P", "AKA", Species.E_COLI)
        with pytest.raises(DataError):
            extract_windows(protein, [SiteAnnotation("P", 9, SiteLabel.POSITIVE)])

    def test_even_window_rejected(self):
        """Test an even window length raises ValueError."""
        protein = ProteinRecord("P", "AKA", Species.E_COLI)
        with pytest.raises(ValueError):
            extract_windows(protein, [], window_len=40)

    def test_resolve_sites_infers_negatives(self):
        """Test unannotated lysines become negatives when inference is on."""
        protein = ProteinRecord("P", "KAKAK", Species.E_COLI)
        sites = resolve_sites(protein, [SiteAnnotation("P", 3, SiteLabel.POSITIVE)], infer_negatives=True)
        assert [(s.position, s.label) for s in sites] == [
            (1, SiteLabel.NEGATIVE),
            (3, SiteLabel.POSITIVE),
            (5, SiteLabel.NEGATIVE),
        ]
        assert len(resolve_sites(protein, [], infer_negatives=False)) == 0

    def test_resolve_sites_conflict(self):
        """Test contradictory labels for one site raise DataError."""
        protein = ProteinRecord("P", "KAK", Species.E_COLI)
        rows = [SiteAnnotation("P", 1, SiteLabel.POSITIVE), SiteAnnotation("P", 1, SiteLabel.NEGATIVE)]
        with pytest.raises(DataError):
            resolve_sites(protein, rows, infer_negatives=False)

    def test_window_round_trip(self):
        """Test the window TSV format reads back unchanged."""
        windows = make_motif_windows(3, 3)
        assert parse_windows(format_windows(windows)) == windows


class TestRedundancy:
    """Test identity clustering."""

    def test_identity_of_identical_sequences(self):
        """Test identical sequences have identity 1."""
        assert sequence_identity("MKLAGK", "MKLAGK") == pytest.approx(1.0)

    def test_identity_uses_best_offset(self):
        """Test a shifted copy still matches over the shorter length."""
        assert sequence_identity("AAMKLVW", "MKLVW") == pytest.approx(1.0)

    def test_identical_proteins_collapse(self):
        """Test three identical proteins keep one representative."""
        proteins = [ProteinRecord(f"P{i}", "MKLAGKTWYR" * 3, Species.E_COLI) for i in range(3)]
        assert len(reduce_redundancy(proteins, 0.30)) == 1

    def test_threshold_one_keeps_distinct(self):
        """Test threshold 1.0 keeps every non-identical protein."""
        proteins = [
            ProteinRecord("A", "MKLAGKTWYR", Species.E_COLI),
            ProteinRecord("B", "MKLAGKTWYA", Species.E_COLI),
        ]
        assert len(reduce_redundancy(proteins, 1.0)) == 2

    def test_longest_is_representative(self):
        """Test the longest member of a cluster is kept."""
        short = ProteinRecord("S", "MKLAGKTWYR", Species.E_COLI)
        long = ProteinRecord("L", "MKLAGKTWYRGG", Species.E_COLI)
        assert [p.id for p in reduce_redundancy([short, long], 0.30)] == ["L"]

    def test_synthetic_proteome_is_non_redundant(self):
        """Test the synthetic test proteome survives clustering intact."""
        proteins, _ = make_motif_proteome(n_proteins=20)
        assert len(reduce_redundancy(proteins, 0.30)) == 20

    def test_bad_threshold(self):
        """Test a threshold outside (0, 1] raises ValueError."""
        with pytest.raises(ValueError):
            reduce_redundancy([ProteinRecord("A", "MK", Species.E_COLI)], 0.0)


class TestSplit:
    """Test stratified splitting."""

    def test_stratified_counts(self):
        """Test each class is split at the training fraction."""
        windows = make_motif_windows(100, 300)
        train, independent = split_train_independent(windows, 0.70, seed=3)
        assert sum(w.y for w in train) == 70
        assert len(train) - sum(w.y for w in train) == 210
        assert {w.origin for w in train}.isdisjoint({w.origin for w in independent})
        assert len(train) + len(independent) == len(windows)

    def test_seed_determinism(self):
        """Test the same seed gives the same split."""
        windows = make_motif_windows(20, 40)
        assert split_train_independent(windows, 0.7, 5) == split_train_independent(windows, 0.7, 5)

    def test_missing_class(self):
        """Test a species without negatives raises DataError."""
        with pytest.raises(DataError):
            split_train_independent(make_motif_windows(10, 0), 0.7, 0)

    def test_published_proportions(self):
        """Test the split fraction tracks the published train share."""
        pos, neg, ind_pos, ind_neg = TABLE1_COUNTS[Species.S_TYPHIMURIUM]
        windows = make_motif_windows(pos + ind_pos, neg + ind_neg)
        train, _ = split_train_independent(windows, 0.70, 0)
        train_pos = sum(w.y for w in train)
        assert train_pos / (pos + ind_pos) == pytest.approx(pos / (pos + ind_pos), abs=0.03)
        assert (len(train) - train_pos) / (neg + ind_neg) == pytest.approx(neg / (neg + ind_neg), abs=0.03)


class TestValidator:
    """Test dataset validation and the summary table."""

    def test_valid_dataset(self):
        """Test a fresh split validates and the summary matches its counts."""
        train, independent = split_train_independent(make_motif_windows(10, 30), 0.7, 0)
        dataset = SpeciesDataset(Species.E_COLI, train, independent)
        ok, violations = DatasetValidator.validate(dataset, 41)
        assert ok, violations
        row = format_summary([dataset]).splitlines()[1].split("\t")
        assert row == ["E. coli", "7", "21", "3", "9"]

    def test_overlap_detected(self):
        """Test a window in both splits is reported."""
        windows = make_motif_windows(2, 2)
        ok, violations = DatasetValidator.validate(SpeciesDataset(Species.E_COLI, windows, windows[:1]), 41)
        assert not ok
        assert any(v.startswith("overlap") for v in violations)

    def test_interior_padding_rejected(self):
        """Test a window with pad letters between real residues is reported."""
        gapped = PeptideWindow("A" * 10 + "X" * 5 + "A" * 5 + "K" + "A" * 20, SiteLabel.POSITIVE,
                               Species.E_COLI, Origin("Q1", 21))
        train, independent = split_train_independent(make_motif_windows(10, 30), 0.7, 0)
        ok, violations = DatasetValidator.validate(SpeciesDataset(Species.E_COLI, train + [gapped], independent), 41)
        assert not ok
        assert violations == ["padding:Q1:21"]

    def test_interior_x_allowed_for_proteins_with_x(self):
        """Test interior X passes when the source protein itself contains X."""
        gapped = PeptideWindow("A" * 10 + "X" * 5 + "A" * 5 + "K" + "A" * 20, SiteLabel.POSITIVE,
                               Species.E_COLI, Origin("Q1", 21))
        train, independent = split_train_independent(make_motif_windows(10, 30), 0.7, 0)
        dataset = SpeciesDataset(Species.E_COLI, train + [gapped], independent)
        ok, violations = DatasetValidator.validate(dataset, 41, proteins_with_x={"Q1"})
        assert ok, violations

    def test_window_requires_center_lysine(self):
        """Test a window not centred on K cannot be built."""
        with pytest.raises(ValueError):
            PeptideWindow("AAA", SiteLabel.POSITIVE, Species.E_COLI, Origin("P", 2))
