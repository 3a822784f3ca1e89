"""Embedding + LSTM network producing deep features for lysine windows."""
