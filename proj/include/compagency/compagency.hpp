#ifndef COMPAGENCY_COMPAGENCY_HPP_
#define COMPAGENCY_COMPAGENCY_HPP_

#include "compagency/constructions.hpp"
#include "compagency/core.hpp"
#include "compagency/error.hpp"
#include "compagency/factorize.hpp"
#include "compagency/persona.hpp"
#include "compagency/pooling.hpp"
#include "compagency/random.hpp"
#include "compagency/stability.hpp"
#include "compagency/welfare.hpp"

#endif  // COMPAGENCY_COMPAGENCY_HPP_
