#pragma once

#include "modrec/b2r2.hpp"
#include "modrec/errors.hpp"
#include "modrec/hod.hpp"
#include "modrec/sequence.hpp"
#include "modrec/signal.hpp"
#include "modrec/spectral.hpp"
