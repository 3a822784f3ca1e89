"""Stage coordinator: prepare, train, extract, evaluate and visualize."""
from collections import defaultdict
from typing import Optional, Union

import numpy as np

from src.config.logging import LogContext, get_logger
from src.config.settings import EnsembleConfig, ModelConfig, RunConfig
from src.corpus import (
    PAD_TOKEN,
    TABLE1_COUNTS,
    DatasetValidator,
    PeptideWindow,
    ProteinRecord,
    SiteAnnotation,
    SiteLabel,
    Species,
    SpeciesDataset,
    extract_windows,
    read_annotations,
    read_fasta,
    reduce_redundancy,
    resolve_sites,
    split_train_independent,
)
from src.corpus.io import format_summary, format_windows, read_windows
from src.ensembles.ensemble import fit_ensemble, predict_proba
from src.ensembles.serialization import ENSEMBLE_FORMAT, ENSEMBLE_VERSION, dumps_ensemble
from src.ensembles.types import DEEP_CLASSIFIER, EnsembleKind
from src.errors import ConfigError, DataError
from src.evaluation.aggregate import aggregate_reports
from src.evaluation.crossval import CrossValidationResult, cross_validate
from src.evaluation.folds import make_fold_plan
from src.evaluation.metrics import evaluate_scores
from src.evaluation.roc import roc_curve
from src.evaluation.types import MetricReport, Protocol, ReportContext
from src.exporter.tables import format_embedding_csv, format_fold_table, format_report_table, format_roc_csv
from src.model.features import FeatureVector, extract_features, feature_matrix, format_features, read_features
from src.model.serialization import MODEL_FORMAT, MODEL_VERSION, dumps_model, load_model
from src.model.trainer import SequenceModel, train_model
from src.pipeline.artifacts import ArtifactStore, sha256_file
from src.pipeline.rng import derive_seed
from src.telemetry.manifest import RunManifest
from src.tsne.embed import max_perplexity, tsne_embed

logger = get_logger(__name__)

POOLED = "pooled"
SPLITS = ("train", "independent")
MIN_PERPLEXITY = 1.0


class PipelineCoordinator:
    """Runs the pipeline stages over serialized artifacts.

    Each stage reads only what earlier stages wrote to the artifact store,
    so any stage can be re-run on its own. Every stage records its timing
    and outputs in the run manifest.
    """

    def __init__(self, config: RunConfig, store: Optional[ArtifactStore] = None):
        """Initialize coordinator.

        Args:
            config: Run configuration
            store: Artifact store; defaults to one rooted at ``paths.output_dir``
        """
        self.config = config
        self.store = store or ArtifactStore(config.paths.output_dir)
        self.manifest = RunManifest.load(self.store.manifest_path)

    # Stage: prepare
    def prepare(self) -> list[SpeciesDataset]:
        """Parse inputs, reduce redundancy, cut windows and split per species.

        Returns:
            One dataset per processed species

        Raises:
            ConfigError: If input paths are not configured
            DataError: On malformed inputs or a requested species without windows
        """
        paths, corpus = self.config.paths, self.config.corpus
        if paths.fasta is None or paths.annotations is None:
            raise ConfigError("prepare needs paths.fasta and paths.annotations")

        with self.manifest.stage("prepare"):
            proteins = read_fasta(paths.fasta, corpus.default_species)
            annotations = read_annotations(paths.annotations)
            self.manifest.inputs = {
                str(paths.fasta): sha256_file(paths.fasta),
                str(paths.annotations): sha256_file(paths.annotations),
            }

            untagged = [p.id for p in proteins if p.species is None]
            if untagged:
                raise DataError(f"{len(untagged)} proteins have no species tag, e.g. {untagged[0]!r}")

            by_protein = self._group_annotations(proteins, annotations)
            infer_negatives = corpus.infer_negatives
            if infer_negatives is None:
                infer_negatives = not any(a.label is SiteLabel.NEGATIVE for a in annotations)
            logger.info("corpus_loaded", proteins=len(proteins), annotations=len(annotations),
                        infer_negatives=infer_negatives)

            datasets = []
            for species in self._species_to_prepare(proteins):
                with LogContext(species=species.value, stage="prepare"):
                    members = [p for p in proteins if p.species is species]
                    dataset = self._prepare_species(species, members, by_protein, infer_negatives)
                    datasets.append(dataset)
            self.store.write_text(self.store.summary_path(), format_summary(datasets))
        self._finish()
        return datasets

    def _group_annotations(
        self, proteins: list[ProteinRecord], annotations: list[SiteAnnotation]
    ) -> dict[str, list[SiteAnnotation]]:
        known = {p.id for p in proteins}
        grouped: dict[str, list[SiteAnnotation]] = defaultdict(list)
        unknown = 0
        for annotation in annotations:
            if annotation.protein_id in known:
                grouped[annotation.protein_id].append(annotation)
            else:
                unknown += 1
        if unknown:
            logger.warning("annotations_unmatched", rows=unknown)
        return grouped

    def _species_to_prepare(self, proteins: list[ProteinRecord]) -> list[Species]:
        if self.config.species:
            return self.config.selected_species
        present = {p.species for p in proteins}
        skipped = [s.value for s in Species if s not in present]
        if skipped:
            logger.warning("species_skipped", species=skipped, reason="no proteins in corpus")
        return [s for s in Species if s in present]

    def _prepare_species(
        self,
        species: Species,
        members: list[ProteinRecord],
        by_protein: dict[str, list[SiteAnnotation]],
        infer_negatives: bool,
    ) -> SpeciesDataset:
        corpus = self.config.corpus
        if not members:
            raise DataError(f"no proteins for requested species {species.value}")
        representatives = reduce_redundancy(members, corpus.identity_threshold)

        windows: list[PeptideWindow] = []
        for protein in representatives:
            sites = resolve_sites(protein, by_protein.get(protein.id, []), infer_negatives)
            windows.extend(extract_windows(protein, sites, corpus.window_len, species))
        if not windows:
            raise DataError(f"no windows for requested species {species.value}")

        train, independent = split_train_independent(windows, corpus.train_frac, self.config.seed)
        dataset = SpeciesDataset(species, train, independent)
        with_x = {p.id for p in representatives if PAD_TOKEN in p.residues}
        ok, violations = DatasetValidator.validate(dataset, corpus.window_len, with_x)
        if not ok:
            raise DataError(f"{species.value}: invalid dataset: {', '.join(violations[:5])}")

        self.store.write_text(self.store.windows_path(species, "train"), format_windows(train))
        self.store.write_text(self.store.windows_path(species, "independent"), format_windows(independent))

        observed = dataset.train_counts, dataset.independent_counts
        logger.info(
            "published_counts",
            observed=[observed[0].positives, observed[0].negatives, observed[1].positives, observed[1].negatives],
            published=list(TABLE1_COUNTS[species]),
        )
        return dataset

    # Stage: train (+ extract)
    def train(self) -> dict[str, SequenceModel]:
        """Train one network per species (or one pooled network), then extract features.

        Raises:
            DataError: If datasets are missing
            NumericalError: If training diverges
        """
        species_list = self._prepared_species()
        models: dict[str, SequenceModel] = {}
        with self.manifest.stage("train"):
            groups: dict[str, list[Species]] = (
                {POOLED: species_list} if self.config.pooled else {s.slug: [s] for s in species_list}
            )
            for key, members in groups.items():
                with LogContext(model=key, stage="train"):
                    windows = [w for s in members for w in self._windows(s, "train")]
                    model = self._train_network(windows, self._model_config(key))
                    path = self.store.model_path(key)
                    self.store.write_text(path, dumps_model(model))
                    models[key] = model
        self._finish()
        self.extract()
        return models

    def _train_network(self, windows: list[PeptideWindow], model_config: ModelConfig) -> SequenceModel:
        fit, validation = split_train_independent(
            windows, 1.0 - model_config.validation_fraction, derive_seed(model_config.seed, "validation")
        )
        if not validation:
            raise DataError("too few training windows to carve a validation set")
        model, _ = train_model(fit, validation, model_config)
        return model

    def _model_config(self, *names: Union[str, int]) -> ModelConfig:
        return self.config.lstm.model_copy(update={"seed": derive_seed(self.config.seed, "lstm", *names)})

    # Stage: extract
    def extract(self) -> dict[Species, dict[str, list[FeatureVector]]]:
        """Write train/independent feature files with the saved network(s).

        Raises:
            DataError: If a model or dataset is missing
        """
        extracted: dict[Species, dict[str, list[FeatureVector]]] = {}
        with self.manifest.stage("extract"):
            for species in self._prepared_species():
                with LogContext(species=species.value, stage="extract"):
                    model = self._load_network(species)
                    extracted[species] = {}
                    for split in SPLITS:
                        features = extract_features(model, self._windows(species, split))
                        self.store.write_text(self.store.features_path(species, split), format_features(features))
                        extracted[species][split] = features
                    logger.info("features_extracted", train=len(extracted[species]["train"]),
                                independent=len(extracted[species]["independent"]))
        self._finish()
        return extracted

    # Stage: evaluate
    def evaluate(self) -> dict[Protocol, list[MetricReport]]:
        """Fit the ensembles and evaluate every configured protocol.

        Returns:
            Per-species reports plus the species-average rows, per protocol

        Raises:
            DataError: If features are missing
        """
        evaluation = self.config.evaluation
        reports: dict[Protocol, list[MetricReport]] = defaultdict(list)
        fold_reports: dict[Protocol, list[MetricReport]] = defaultdict(list)

        with self.manifest.stage("evaluate"):
            for species in self._prepared_species():
                with LogContext(species=species.value, stage="evaluate"):
                    features = {split: self._features(species, split) for split in SPLITS}
                    windows = {split: self._windows(species, split) for split in SPLITS}
                    network = self._load_network(species) if evaluation.include_deep_model else None
                    X_train, y_train = feature_matrix(features["train"])
                    fitted = {}
                    for kind in evaluation.classifiers:
                        fitted[kind] = fit_ensemble(X_train, y_train, self._ensemble_config(kind, species))
                        self.store.write_text(
                            self.store.ensemble_path(species, kind.value), dumps_ensemble(fitted[kind])
                        )

                    for protocol in evaluation.protocols:
                        with LogContext(protocol=protocol.value):
                            if protocol.folds is None:
                                split = protocol.value
                                X, y = feature_matrix(features[split])
                                scores = {kind.value: predict_proba(model, X) for kind, model in fitted.items()}
                                if network is not None:
                                    scores[DEEP_CLASSIFIER] = network.predict_proba(windows[split])
                                for classifier, s in scores.items():
                                    context = ReportContext(species.value, classifier, protocol.value)
                                    reports[protocol].append(evaluate_scores(s, y, context, evaluation.threshold))
                                    self._write_roc(species, protocol, classifier, s, y)
                            else:
                                result = self._cross_validate(species, protocol, windows, features)
                                reports[protocol].extend(result.averaged.values())
                                for classifier, rows in result.fold_reports.items():
                                    fold_reports[protocol].extend(rows)
                                    self._write_roc(species, protocol, classifier,
                                                    result.oof_scores[classifier], result.labels)
                    logger.info("species_evaluated", protocols=[p.value for p in evaluation.protocols])

            tables: dict[Protocol, list[MetricReport]] = {}
            for protocol in evaluation.protocols:
                rows = reports[protocol]
                averages = aggregate_reports(rows, group_by=("classifier", "protocol"))
                tables[protocol] = rows + averages
                self.store.write_text(self.store.report_path(protocol.value), format_report_table(tables[protocol]))
                if fold_reports[protocol]:
                    self.store.write_text(
                        self.store.report_path(protocol.value, "folds"), format_fold_table(fold_reports[protocol])
                    )
        self._finish()
        return tables

    def _cross_validate(
        self,
        species: Species,
        protocol: Protocol,
        windows: dict[str, list[PeptideWindow]],
        features: dict[str, list[FeatureVector]],
    ) -> CrossValidationResult:
        evaluation = self.config.evaluation
        all_windows = windows["train"] + windows["independent"]
        X_all, y_all = feature_matrix(features["train"] + features["independent"])
        plan = make_fold_plan(
            len(all_windows),
            protocol.folds,
            derive_seed(self.config.seed, "folds", species.name),
            labels=y_all if evaluation.stratified_folds else None,
        )
        names = [kind.value for kind in evaluation.classifiers]
        if evaluation.cv_retrain_extractor and evaluation.include_deep_model:
            names.insert(0, DEEP_CLASSIFIER)

        def recipe(train_idx: list[int], test_idx: list[int]) -> dict[str, np.ndarray]:
            train_idx, test_idx = np.asarray(train_idx), np.asarray(test_idx)
            fold = plan.assignments[int(test_idx[0])]
            scores: dict[str, np.ndarray] = {}
            if evaluation.cv_retrain_extractor:
                fold_train = [all_windows[i] for i in train_idx]
                fold_test = [all_windows[i] for i in test_idx]
                network = self._train_network(fold_train, self._model_config(species.slug, protocol.value, fold))
                X_train = np.stack([f.values for f in extract_features(network, fold_train)])
                X_test = np.stack([f.values for f in extract_features(network, fold_test)])
                if evaluation.include_deep_model:
                    scores[DEEP_CLASSIFIER] = network.predict_proba(fold_test)
            else:
                X_train, X_test = X_all[train_idx], X_all[test_idx]
            for kind in evaluation.classifiers:
                model = fit_ensemble(X_train, y_all[train_idx], self._ensemble_config(kind, species, protocol.value, fold))
                scores[kind.value] = predict_proba(model, X_test)
            return scores

        return cross_validate(
            list(range(len(all_windows))),
            y_all,
            recipe,
            plan,
            ReportContext(species=species.value, protocol=protocol.value),
            evaluation.threshold,
            classifiers=names,
        )

    def _ensemble_config(self, kind: EnsembleKind, species: Species, *names: Union[str, int]) -> EnsembleConfig:
        seed = derive_seed(self.config.seed, "ensemble", kind.value, species.name, *names)
        return self.config.ensembles[kind].model_copy(update={"seed": seed})

    def _write_roc(self, species: Species, protocol: Protocol, classifier: str, scores: np.ndarray, labels: np.ndarray) -> None:
        labels = np.asarray(labels)
        if labels.min() == labels.max():
            logger.warning("roc_skipped", classifier=classifier, reason="single class")
            return
        curve = roc_curve(scores, labels)
        self.store.write_text(self.store.roc_path(species, protocol.value, classifier), format_roc_csv(curve))

    # Stage: visualize
    def visualize(self) -> dict[Species, str]:
        """Embed each species' features in 2-D and write one CSV per species.

        Perplexity is lowered (with a warning) when a species has too few points.

        Raises:
            DataError: If features are missing or fewer than four points exist
        """
        tsne = self.config.tsne
        written: dict[Species, str] = {}
        with self.manifest.stage("visualize"):
            for species in self._prepared_species():
                with LogContext(species=species.value, stage="visualize"):
                    splits = SPLITS if tsne.split == "both" else (tsne.split,)
                    features = [f for split in splits for f in self._features(species, split)]
                    perplexity = tsne.perplexity
                    if len(features) < 3 * perplexity + 1:
                        perplexity = max_perplexity(len(features))
                        if perplexity < MIN_PERPLEXITY:
                            raise DataError(f"{species.value}: {len(features)} points are too few to embed")
                        logger.warning("perplexity_lowered", requested=tsne.perplexity, used=perplexity,
                                       points=len(features))
                    config = tsne.model_copy(update={"seed": derive_seed(self.config.seed, "tsne", species.name)})
                    embedding = tsne_embed(features, [f.y for f in features], config, perplexity=perplexity)
                    metadata = {"species": species.value, "split": tsne.split, "tsne": config.model_dump(mode="json")}
                    path = self.store.tsne_path(species, tsne.split)
                    self.store.write_text(path, format_embedding_csv(embedding, metadata))
                    written[species] = self.store.relative(path)
        self._finish()
        return written

    # Artifact access
    def _prepared_species(self) -> list[Species]:
        if self.config.species:
            return self.config.selected_species
        prepared = [s for s in Species if self.store.windows_path(s, "train").is_file()]
        if not prepared:
            raise DataError(f"no prepared datasets under {self.store.root}; run `prepare` first")
        return prepared

    def _windows(self, species: Species, split: str) -> list[PeptideWindow]:
        return read_windows(self.store.require(self.store.windows_path(species, split), "prepare"))

    def _features(self, species: Species, split: str) -> list[FeatureVector]:
        return read_features(self.store.require(self.store.features_path(species, split), "train"), species)

    def _load_network(self, species: Species) -> SequenceModel:
        key = POOLED if self.config.pooled else species.slug
        return load_model(self.store.require(self.store.model_path(key), "train"))

    def _finish(self) -> None:
        self.manifest.config = self.config.snapshot()
        self.manifest.formats.update({MODEL_FORMAT: MODEL_VERSION, ENSEMBLE_FORMAT: ENSEMBLE_VERSION})
        self.manifest.add_artifacts(self.store.written)
        self.manifest.prune(self.store.root)
        self.manifest.save(self.store.manifest_path)
