#pragma once

#include "torusqe/bessel.hpp"
#include "torusqe/dictionary.hpp"
#include "torusqe/factor.hpp"
#include "torusqe/lattice.hpp"
#include "torusqe/measures.hpp"
#include "torusqe/observables.hpp"
#include "torusqe/parallel.hpp"
#include "torusqe/point.hpp"
#include "torusqe/quadrature.hpp"
#include "torusqe/restriction.hpp"
#include "torusqe/rng.hpp"
#include "torusqe/spectral.hpp"
#include "torusqe/variance.hpp"
