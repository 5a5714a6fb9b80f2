#pragma once
// Convenience include for the whole library.

#include "ctrkd/checkpoint.hpp"
#include "ctrkd/config_file.hpp"
#include "ctrkd/datagen.hpp"
#include "ctrkd/dataset_io.hpp"
#include "ctrkd/distill.hpp"
#include "ctrkd/error.hpp"
#include "ctrkd/hash.hpp"
#include "ctrkd/impression.hpp"
#include "ctrkd/metrics.hpp"
#include "ctrkd/model.hpp"
#include "ctrkd/optimizer.hpp"
#include "ctrkd/pipeline.hpp"
#include "ctrkd/prng.hpp"
#include "ctrkd/report_io.hpp"
#include "ctrkd/trainer.hpp"
#include "ctrkd/vocab.hpp"
#include "ctrkd/warmstart.hpp"
