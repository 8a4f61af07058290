/** Tiny flag parser: --name value pairs plus boolean switches. */

export function parseArgs(argv: string[], switches: Set<string> = new Set()):
    Map<string, string | true> {
  const out = new Map<string, string | true>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith('--')) throw new Error(`unexpected argument ${arg}`);
    const name = arg.slice(2);
    if (switches.has(name)) {
      out.set(name, true);
    } else {
      const value = argv[++i];
      if (value === undefined) throw new Error(`--${name} needs a value`);
      out.set(name, value);
    }
  }
  return out;
}

export function required(args: Map<string, string | true>, name: string): string {
  const value = args.get(name);
  if (typeof value !== 'string') throw new Error(`missing required --${name}`);
  return value;
}
