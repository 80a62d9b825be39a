# -*- coding: utf-8 -*-

from .generation_params import GenerationParams, ConfigurationError # noqa
