"""Tree-ensemble classifiers over deep feature vectors."""
