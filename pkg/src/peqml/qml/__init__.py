"""Classification experiments: QNN training and quantum-kernel SVMs."""
