#ifndef QBO_QBO_HPP
#define QBO_QBO_HPP

#include "qbo/benchfn.hpp"
#include "qbo/error.hpp"
#include "qbo/fpe.hpp"
#include "qbo/harness.hpp"
#include "qbo/langevin.hpp"
#include "qbo/optimizers.hpp"
#include "qbo/potential.hpp"
#include "qbo/quantize.hpp"
#include "qbo/rng.hpp"
#include "qbo/verify.hpp"

#endif  // QBO_QBO_HPP
