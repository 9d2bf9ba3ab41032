#pragma once

#include "findret/corpus.hpp"
#include "findret/crr.hpp"
#include "findret/dense.hpp"
#include "findret/error.hpp"
#include "findret/eval.hpp"
#include "findret/lexical.hpp"
#include "findret/parallel.hpp"
#include "findret/prefilter.hpp"
#include "findret/retriever.hpp"
#include "findret/similarity_matrix.hpp"
#include "findret/simulation.hpp"
#include "findret/synthetic.hpp"
#include "findret/tokenizer.hpp"
