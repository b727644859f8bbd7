# Copyright 2026 The eigencent Authors | http://www.eclipse.org/legal/epl-v20.html

# Named hyper-parameter presets, one per corpus plus a desk-scale synthetic task.
# A config file selects one with "preset" and may override any key.
#   embedding_size <INT>: word vector dimension
#   encoder_hidden_unit <INT>: hidden units per direction of the fusion encoder
#   connectivity_hidden_units <INT>: hidden units of the pairwise connectivity scorer
#   regularization_rate <FLOAT>: L2 coefficient added to every gradient
#   initial_learning_rate <FLOAT>: Adam step size at step 0
#   learning_rate_decay <FLOAT>: factor applied every learning_rate_decay_steps steps
#   learning_rate_decay_steps <INT>: see above; the decay is continuous in the step count
#   initial_batch_size <INT>: examples per optimizer step
#   batch_size_low_bound <INT>: batches with long sequences are split, never below this
#   dropout_rate <FLOAT>: inverted dropout on embeddings and the classifier hidden layer

HYPER_PARAMS = {
    'yelp-2013': {
        'task': 'document',
        'embedding_size': 300,
        'encoder_hidden_unit': 300,
        'connectivity_hidden_units': 50,
        'regularization_rate': 1e-6,
        'initial_learning_rate': 1e-4,
        'learning_rate_decay': 0.9,
        'learning_rate_decay_steps': 2000,
        'initial_batch_size': 64,
        'batch_size_low_bound': 32,
        'dropout_rate': 0.6,
    },
    'yelp-2014': {
        'task': 'document',
        'embedding_size': 300,
        'encoder_hidden_unit': 300,
        'connectivity_hidden_units': 50,
        'regularization_rate': 1e-6,
        'initial_learning_rate': 1e-4,
        'learning_rate_decay': 0.9,
        'learning_rate_decay_steps': 5000,
        'initial_batch_size': 64,
        'batch_size_low_bound': 16,
        'dropout_rate': 0.6,
    },
    'imdb': {
        'task': 'document',
        'embedding_size': 300,
        'encoder_hidden_unit': 300,
        'connectivity_hidden_units': 50,
        'regularization_rate': 1e-6,
        'initial_learning_rate': 1e-4,
        'learning_rate_decay': 0.9,
        'learning_rate_decay_steps': 1000,
        'initial_batch_size': 32,
        'batch_size_low_bound': 32,
        'dropout_rate': 0.4,
    },
    'sst-1': {
        'task': 'sentence',
        'embedding_size': 300,
        'encoder_hidden_unit': 300,
        'connectivity_hidden_units': 50,
        'regularization_rate': 1e-6,
        'initial_learning_rate': 3e-4,
        'learning_rate_decay': 0.95,
        'learning_rate_decay_steps': 500,
        'initial_batch_size': 128,
        'batch_size_low_bound': 32,
        'dropout_rate': 0.6,
    },
    'sst-2': {
        'task': 'sentence',
        'embedding_size': 300,
        'encoder_hidden_unit': 300,
        'connectivity_hidden_units': 50,
        'regularization_rate': 1e-6,
        'initial_learning_rate': 3e-4,
        'learning_rate_decay': 0.95,
        'learning_rate_decay_steps': 500,
        'initial_batch_size': 128,
        'batch_size_low_bound': 16,
        'dropout_rate': 0.6,
    },
    'snli': {
        'task': 'pair',
        'embedding_size': 300,
        'encoder_hidden_unit': 300,
        'connectivity_hidden_units': 30,
        'regularization_rate': 1e-20,
        'initial_learning_rate': 1e-4,
        'learning_rate_decay': 0.95,
        'learning_rate_decay_steps': 20000,
        'initial_batch_size': 128,
        'batch_size_low_bound': 128,
        'dropout_rate': 0.2,
    },
    'synthetic': {
        'task': 'synthetic',
        'encoder': 'identity_projection',
        'embedding_size': 16,
        'encoder_hidden_unit': 16,
        'connectivity_hidden_units': 8,
        'classifier_hidden_units': 16,
        'regularization_rate': 1e-6,
        'initial_learning_rate': 3e-3,
        'learning_rate_decay': 0.95,
        'learning_rate_decay_steps': 500,
        'initial_batch_size': 32,
        'batch_size_low_bound': 8,
        'dropout_rate': 0.1,
        'epochs': 20,
    },
}

# Keyword task used by the synthetic preset and `train --task synthetic`.
SYNTHETIC_TASK = {
    'n_classes': 4,
    'vocab': 200,
    'distractor_rate': 0.9,
    'min_length': 10,
    'max_length': 30,
    'n_examples': 2000,
}
