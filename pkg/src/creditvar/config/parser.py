"""creditvar.config.parser - configuration parsing for creditvar runs.

Options are resolved from the command line, an INI-style configuration file and defined
defaults, in that order of priority.
"""
import sys
from argparse import ArgumentParser
from configparser import ConfigParser as NativeConfigParser, Error as NativeConfigError
from functools import partial

import tornado.options

from creditvar import __version__


class ConfigError(Exception):
    """ConfigParser exception class.

    A trivial exception class for signalling configuration parsing errors
    """

    pass


class _StrictArgumentParser(ArgumentParser):
    """ArgumentParser that raises ConfigError instead of printing usage and exiting."""

    def error(self, message):
        raise ConfigError(message)


def _parse_bool(value):
    """Parse a boolean option value given as text."""
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise ConfigError('Invalid boolean value {!r}'.format(value))


class ConfigParser(object):
    """Parses configuration options from the command-line and from a file.

    Parsed options are set as attributes of the object. Options given on the command line take
    priority over values in any configuration file named by --config, which in turn take priority
    over defaults. Options defined by this parser are read from the [run] section of the file;
    options already defined by tornado (notably the logging options) are integrated into the
    parser and read from the [tornado] section, and are loaded back into tornado.options so that
    its parse callbacks configure logging.

    Unlike a permissive parser, unknown command-line flags, malformed values and unknown keys in
    the [run] section are all reported as ConfigError.
    """

    def __init__(self, commands=None, prog='creditvar'):
        """Initialise the configuration parser.

        :param commands: optional sequence of command names accepted as a positional argument
        :param prog: program name shown in usage messages
        """
        self.allowed_options = {
            'run': {},
            'tornado': {},
        }

        self.arg_parser = _StrictArgumentParser(prog=prog)
        self.file_parser = NativeConfigParser()
        self.file_parsed = False
        self._tornado_loaded = False

        self.commands = tuple(commands) if commands else ()
        self.command = None
        if self.commands:
            self.arg_parser.add_argument(
                'command', choices=self.commands, help='Command to run')

        self.define('version', option_type=bool, default=False, action='store_true',
                    option_help='Show the creditvar version information and exit',
                    callback=self._version_callback)

        self.define('config', default=None, metavar='FILE',
                    option_help='Specify a configuration file to parse')

    def define(self, name, default=None, option_type=None, option_help=None, metavar=None,
               multiple=False, action='store', callback=None):
        """Define an option to be parsed from the command-line and/or a configuration file.

        Named options can be given a default value, a type, which can either be given explicitly
        or inferred from the default value if given, ``help`` and ``metavar`` values for display
        in command-line help, and a ``multiple`` flag to allow comma-delimited multiple values.

        :param name: name of the option
        :param default: default value for the option
        :param option_type: type of the option (e.g. int, float, bool, str)
        :param option_help: help text to be displayed for the option
        :param metavar: a name for the option to be used in help text
        :param multiple: defines if the option accepts multiple, comma-delimited values
        :param action: ArgumentParser-like action to be taken on parsing option
        :param callback: callback to run whenever a value for the option is set at parse time
        :return: None
        """
        self.allowed_options['run'][name] = ConfigOption(
            name, option_type=option_type, default=default, multiple=multiple, callback=callback)

        option_type = self.allowed_options['run'][name].option_type
        if multiple:
            option_type = partial(_parse_multiple_arg, arg_type=option_type)

        # The argparse default stays None so a file value is not clobbered; the defined default
        # is resolved at parse time
        add_kwargs = {
            'action': action, 'default': None,
            'help': option_help,
        }
        if action != 'store_true' and action != 'store_false':
            add_kwargs['type'] = option_type
            add_kwargs['metavar'] = metavar

        self.arg_parser.add_argument('--{}'.format(name), **add_kwargs)

        # Allow parser.<option> access before parsing
        setattr(self, name, None)

    def parse(self, args=None):
        """Parse command-line and file configuration options.

        :param args: optional list of arguments to parse, sys.argv[1:] if not given
        :raises ConfigError: on unknown flags, bad values or an unreadable configuration file
        :return: None
        """
        if args is None:
            args = sys.argv[1:]

        self._load_tornado_options()

        arg_config = self.arg_parser.parse_args(list(args))
        self.command = getattr(arg_config, 'command', None)

        file_config = self._parse_file_config(arg_config.config)

        arg_config_vars = vars(arg_config)
        for section in self.allowed_options:
            for option, config_option in self.allowed_options[section].items():
                option_val = None
                if file_config[section].get(option) is not None:
                    option_val = file_config[section][option]
                if arg_config_vars.get(option) is not None:
                    option_val = arg_config_vars[option]
                if option_val is None:
                    option_val = config_option.default

                setattr(self, option, option_val)

                if option in tornado.options.options:
                    try:
                        setattr(tornado.options.options, option, option_val)
                    except tornado.options.Error as e:
                        raise ConfigError('Invalid value for option {}: {}'.format(option, e))

                if config_option.callback is not None:
                    config_option.callback(option_val)

        # Replicate the tornado parser behaviour, e.g. enabling pretty logging
        tornado.options.options.run_parse_callbacks()

    def _parse_file_config(self, config_file):
        """Parse a configuration file (INTERNAL METHOD).

        :param config_file: name of configuration file to parse
        :return: container of resolved file configuration options
        """
        file_config = {section: {} for section in self.allowed_options}

        if not config_file:
            return file_config

        try:
            with open(config_file) as config_fp:
                self.file_parser.read_file(config_fp)
        except (OSError, NativeConfigError) as e:
            raise ConfigError('Failed to parse configuration file: {}'.format(e))

        self.file_parsed = True

        parser_get_map = {
            int: self.file_parser.getint,
            float: self.file_parser.getfloat,
            bool: self.file_parser.getboolean,
            str: self.file_parser.get,
        }

        if self.file_parser.has_section('run'):
            known = set(self.allowed_options['run'])
            unknown = sorted(set(self.file_parser.options('run')) - known)
            if unknown:
                raise ConfigError('Unknown option(s) in [run] section of {}: {}'.format(
                    config_file, ', '.join(unknown)))

        for section in self.allowed_options:
            if not self.file_parser.has_section(section):
                continue
            for option, config_option in self.allowed_options[section].items():
                if not self.file_parser.has_option(section, option):
                    continue
                option_type = config_option.option_type
                try:
                    if config_option.multiple:
                        value = _parse_multiple_arg(
                            self.file_parser.get(section, option), arg_type=option_type)
                    elif option_type in parser_get_map:
                        value = parser_get_map[option_type](section, option)
                    else:
                        value = option_type(self.file_parser.get(section, option))
                except (ValueError, TypeError) as e:
                    raise ConfigError('Invalid value for option {} in [{}] section: {}'.format(
                        option, section, e))
                file_config[section][option] = value

        return file_config

    def _load_tornado_options(self):
        """Load tornado options into the parser (INTERNAL METHOD)."""
        if self._tornado_loaded:
            return
        tornado_opts = tornado.options.options._options
        for opt in sorted(tornado_opts):
            if opt == 'help':
                continue
            name = tornado_opts[opt].name
            opt_type = tornado_opts[opt].type
            if opt_type is bool:
                opt_type = _parse_bool
            self.arg_parser.add_argument('--{}'.format(name), type=opt_type,
                                         help=tornado_opts[opt].help,
                                         metavar=tornado_opts[opt].metavar)
            self.allowed_options['tornado'][name] = ConfigOption(
                name, tornado_opts[opt].type, tornado_opts[opt].default
            )
        self._tornado_loaded = True

    def _version_callback(self, value):
        """Print the creditvar version information and exit."""
        if value:
            print("creditvar {}".format(__version__))
            sys.exit(0)

    def __contains__(self, item):
        """Containment check operator - allows ``in`` to check for presence of option.

        :param item: item to check for presence
        """
        return hasattr(self, item)

    def __iter__(self):
        """Return an iterator object over the options specified in the current instance."""
        return (name for section in self.allowed_options for name in self.allowed_options[section])


def _parse_multiple_arg(arg, arg_type=str, splitchar=','):
    """Parse comma-delimited multiple arguments into a typed list.

    :param arg: argument/option string to be resolved. e.g ``0.1,0.15,0.2``
    :param arg_type: argument type to resolve, e.g. int, float, bool or str
    :param splitchar: character to split string on, comma by default
    :return: list of resolved, type-cast values from the argument string
    """
    try:
        return [arg_type(elem.strip()) for elem in arg.split(splitchar)]
    except ValueError:
        raise ConfigError('Multiple-valued argument contained element of incorrect type')


class ConfigOption(object):
    """A configuration option container class.

    A simple container class used internally by ConfigParser to define a configuration option,
    its type, default value and whether it has multiple values
    """

    def __init__(self, name, option_type=None, default=None, multiple=False, callback=None):
        """Initialise the ConfigOption object.

        :param name: name of the option
        :param option_type: type of the option (e.g. int, bool, str, ...)
        :param default:  default value for the option
        :param multiple: flag indicating multiple-valued option
        :param callback: callback to be called whenever option has a value set at parse time
        """
        self.name = name
        self.option_type = option_type
        self.default = default
        self.multiple = multiple
        self.callback = callback

        if self.option_type is not None and self.default is not None:
            if self.default.__class__ != self.option_type:
                raise ConfigError(
                    'Default value {} for option {} does not have correct type ({})'.format(
                        self.default, self.name, self.option_type
                    )
                )

        if self.option_type is None:
            if self.default is not None:
                self.option_type = self.default.__class__
            else:
                self.option_type = str
