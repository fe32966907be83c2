#ifndef PSTX_PSTX_HPP
#define PSTX_PSTX_HPP

#include "pstx/chain.hpp"
#include "pstx/design.hpp"
#include "pstx/errors.hpp"
#include "pstx/exact.hpp"
#include "pstx/inverse.hpp"
#include "pstx/io.hpp"
#include "pstx/linalg.hpp"
#include "pstx/matrix.hpp"
#include "pstx/network.hpp"
#include "pstx/numeric.hpp"
#include "pstx/polynomial.hpp"
#include "pstx/selector.hpp"
#include "pstx/spectral.hpp"
#include "pstx/transfer.hpp"

#endif  // PSTX_PSTX_HPP
