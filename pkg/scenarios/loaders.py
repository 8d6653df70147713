"""
Reading, echoing and hashing scenario files.

Scenario files are YAML (JSON is accepted as well, being a subset). Errors are
reported as ScenarioValidationError naming the field and, when it can be
located, the line of the offending value.
"""
import hashlib
import json
import logging
from pathlib import Path

import yaml
from pydantic import ValidationError

from kernels.utils import check_kernels
from main.conf import herding_setting
from main.exceptions import ScenarioValidationError
from scenarios.models import Scenario

logger = logging.getLogger(__name__)

SCENARIO_SUFFIX = '.scenario'

# published run names -> bundled scenario
BUNDLED_ALIASES = {
    'fig1_left': 'rotation_five_evaders',
    'fig1_right': 'rotation_then_pursuit',
    'fig3': 'off_bang_off_reach',
    'fig4': 'waypoint_tour',
    'fig5': 'constant_control_reach',
    'fig6': 'guidance_min_effort',
    'fig7': 'guidance_min_time',
    'fig8': 'two_drivers_min_effort',
    'fig8_top': 'two_drivers_min_effort',
    'fig8_bottom': 'two_drivers_min_time',
    'fig9': 'two_drivers_flanking',
    'fig10': 'two_by_two_min_effort',
    'fig10_top': 'two_by_two_min_effort',
    'fig10_bottom': 'two_by_two_min_time',
    'fig11': 'stabilize_one_driver',
    'fig12': 'stabilize_two_drivers',
    'fig13': 'stabilize_four_drivers',
    'fig14': 'stabilize_sixteen_evaders',
    'fig15': 'stabilize_without_flocking',
    'fig16': 'feedback_guidance',
    'fig17': 'feedback_herd',
    'fig18': 'feedback_gathering',
    'fig19': 'feedback_gathering_three_drivers',
}


def _locate(text, loc):
    """Line (1-based) of the node at path ``loc``, or None."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    line = node.start_mark.line + 1 if node is not None else None
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            matches = [value for name, value in node.value if name.value == str(key)]
            if not matches:
                break
            node = matches[0]
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            break
        line = node.start_mark.line + 1
    return line


def parse_scenario(text, source='<string>'):
    """
    Validate scenario text.

    Raises:
        ScenarioValidationError: On a parse error or a violated invariant
        KernelInvalidError: If the kernels break the sign pattern of f = f_d - f_e
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, 'problem_mark', None)
        line = mark.line + 1 if mark is not None else None
        raise ScenarioValidationError(f"{source}: cannot parse scenario: {exc}", line=line)
    if not isinstance(data, dict):
        raise ScenarioValidationError(f"{source}: a scenario must be a mapping")

    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        loc = tuple(error['loc'])
        field = '.'.join(str(part) for part in loc) or None
        line = _locate(text, loc)
        where = f" (line {line})" if line else ''
        raise ScenarioValidationError(f"{source}: {field or 'scenario'}{where}: {error['msg']}", field=field, line=line)

    check_kernels(scenario.kernel_set())
    return scenario


def load_scenario(path):
    """
    Load and validate a scenario file.

    Args:
        path: Path to a .scenario (YAML) or .json file

    Returns:
        Scenario with every default filled in
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioValidationError(f"Cannot read scenario {path}: {exc}")
    scenario = parse_scenario(text, source=str(path))
    logger.debug(f"Loaded scenario {scenario.name!r} from {path}")
    return scenario


def bundled_path(name):
    """Path of a bundled scenario; published run names are resolved through BUNDLED_ALIASES."""
    directory = Path(herding_setting('SCENARIO_DIR'))
    stem = name.removesuffix(SCENARIO_SUFFIX)
    return directory / (BUNDLED_ALIASES.get(stem, stem) + SCENARIO_SUFFIX)


def load_bundled(name):
    """Load one of the scenarios shipped in scenarios/data by name."""
    return load_scenario(bundled_path(name))


def bundled_names():
    directory = Path(herding_setting('SCENARIO_DIR'))
    return sorted(path.stem for path in directory.glob('*' + SCENARIO_SUFFIX))


def resolve_scenario(value):
    """A path to a scenario file, or the name of a bundled one."""
    path = Path(value)
    if path.exists():
        return load_scenario(path)
    if bundled_path(value).exists():
        return load_bundled(value)
    raise ScenarioValidationError(f"No scenario file or bundled scenario named {value!r}")


def dump_scenario(scenario):
    """YAML text of a scenario with all defaults filled in; loading it gives the same scenario."""
    return yaml.safe_dump(scenario.model_dump(mode='json'), sort_keys=False, default_flow_style=None)


def scenario_hash(scenario):
    """sha256 of the canonical JSON form, used to tie output files to their scenario."""
    canonical = json.dumps(scenario.model_dump(mode='json'), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode()).hexdigest()
