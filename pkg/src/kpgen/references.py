"""Published reference figures, recorded as named constants.

These are the benchmark-scale numbers the original experiments report.
They are kept for documentation and internal-consistency checks only;
reproducing them requires the full training corpus and is out of scope
for this package.
"""

# Dataset statistics: samples, mean present keyphrases, mean phrase length.
DATASET_STATS = {
    "kp20k_train": (464_676, 2.94, 2.01),
    "kp20k_valid": (20_000, 3.49, 1.86),
    "inspec_test": (500, 7.20, 2.40),
    "nus_test": (211, 5.64, 1.93),
    "semeval_test": (100, 6.12, 2.07),
    "krapivin_test": (400, 3.24, 1.86),
    "kp20k_test": (20_000, 3.31, 1.86),
}

# Graph statistics per test set: mean nodes, edges, in-in edges, in-out edges.
GRAPH_STATS = {
    "inspec": (145.27, 374.07, 40.64, 75.82),
    "krapivin": (197.24, 532.32, 19.66, 72.48),
    "nus": (240.81, 627.68, 34.97, 109.00),
    "semeval": (245.72, 679.97, 43.98, 131.78),
}

# Observed fraction of node pairs connected by an edge on the test graphs.
GRAPH_EDGE_DENSITY = 0.026

# Generated/correct keyphrase counts for the full model.
COUNT_STATS = {
    "inspec": (5.40, 2.26),
    "semeval": (6.10, 1.91),
    "kp20k": (4.90, 1.45),
}

# Model hyper-parameters used at benchmark scale.
HPARAMS = {
    "bigru_layers": 1,
    "word_dim": 300,
    "pos_dim": 30,
    "position_dim": 10,
    "gcn_layers": 6,
    "hidden_dim": 400,
    "edge_type_dim": 80,
    "gru_hidden": 400,
    "decoder_layers": 3,
    "lambda1": 1.0,
    "lambda2": 0.1,
    "beam_width": 100,
    "batch_size": 128,
    "learning_rate": 1e-3,
    "dropout": 0.2,
    "grad_clip": 0.2,
    "max_epochs": 20,
    "eval_every": 2000,
    "patience": 3,
}

# Grid searched for the two inference factors.
LAMBDA1_GRID = [0.1, 0.2, 0.5, 0.8, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 10.0]
LAMBDA2_GRID = [0.01, 0.05, 0.1, 0.2, 0.5, 0.8, 1.0, 1.5, 2.0]
