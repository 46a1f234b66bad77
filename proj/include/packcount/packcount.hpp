#ifndef PACKCOUNT_PACKCOUNT_HPP
#define PACKCOUNT_PACKCOUNT_HPP

#include "packcount/errors.hpp"
#include "packcount/rng.hpp"
#include "packcount/permutation.hpp"
#include "packcount/instance.hpp"
#include "packcount/bipartite.hpp"
#include "packcount/packing.hpp"
#include "packcount/dynamics.hpp"
#include "packcount/parallel.hpp"
#include "packcount/coupling.hpp"
#include "packcount/matching_coupling.hpp"
#include "packcount/path_coupling.hpp"
#include "packcount/counting.hpp"
#include "packcount/cli.hpp"

#endif  // PACKCOUNT_PACKCOUNT_HPP
