from emfield.cli.commands import baseline, encode, incident, loss, metrics, reconstruct, selftest, solve, synth

COMMANDS = [incident, solve, reconstruct, loss, metrics, baseline, selftest, encode, synth]
