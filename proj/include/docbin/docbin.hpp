#ifndef DOCBIN_DOCBIN_HPP
#define DOCBIN_DOCBIN_HPP

#include "docbin/classical.hpp"
#include "docbin/core/error.hpp"
#include "docbin/core/image.hpp"
#include "docbin/core/netpbm.hpp"
#include "docbin/core/parallel.hpp"
#include "docbin/core/random.hpp"
#include "docbin/dataset/manifest.hpp"
#include "docbin/dataset/patches.hpp"
#include "docbin/dataset/synth.hpp"
#include "docbin/io/csv.hpp"
#include "docbin/metrics.hpp"
#include "docbin/morphology.hpp"
#include "docbin/nn/adam.hpp"
#include "docbin/nn/autograd.hpp"
#include "docbin/nn/checkpoint.hpp"
#include "docbin/nn/loss.hpp"
#include "docbin/nn/networks.hpp"
#include "docbin/pipeline/ablation.hpp"
#include "docbin/pipeline/corpus.hpp"
#include "docbin/pipeline/inference.hpp"
#include "docbin/pipeline/options.hpp"
#include "docbin/pipeline/run_dir.hpp"
#include "docbin/pipeline/stages.hpp"
#include "docbin/pipeline/training.hpp"
#include "docbin/wavelet.hpp"

#endif  // DOCBIN_DOCBIN_HPP
