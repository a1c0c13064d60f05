#pragma once

// Task/step embedding learning over instruction corpora: relevance and
// pairwise-order prediction heads over recurrent or bag encoders, plus an
// exact integer-program solver that turns noisy pairwise probabilities into
// a globally consistent partial order under an ambiguity budget.

#include "procknow/adam.hpp"
#include "procknow/checkpoint.hpp"
#include "procknow/corpus.hpp"
#include "procknow/embedding.hpp"
#include "procknow/encoder.hpp"
#include "procknow/error.hpp"
#include "procknow/evaluate.hpp"
#include "procknow/gradcheck.hpp"
#include "procknow/heads.hpp"
#include "procknow/linalg.hpp"
#include "procknow/ordersolve.hpp"
#include "procknow/rng.hpp"
#include "procknow/sampling.hpp"
#include "procknow/synthetic.hpp"
#include "procknow/tokenize.hpp"
#include "procknow/train.hpp"
