#!/usr/bin/env node
// Minimal `z3 -in` stand-in: reads an SMT-LIB2 script on stdin, evaluates it
// with the z3-solver WASM build, writes the solver output to stdout.
const { init } = require('z3-solver');

async function readStdin() {
  const chunks = [];
  for await (const chunk of process.stdin) chunks.push(chunk);
  return Buffer.concat(chunks).toString('utf8');
}

(async () => {
  const script = await readStdin();
  const { Z3 } = await init();
  const cfg = Z3.mk_config();
  const ctx = Z3.mk_context(cfg);
  Z3.del_config(cfg);
  let out;
  try {
    out = await Z3.eval_smtlib2_string(ctx, script);
  } catch (e) {
    process.stdout.write(`(error "${String(e).replace(/"/g, "'")}")\n`);
    process.exit(1);
  }
  process.stdout.write(out.endsWith('\n') || out === '' ? out : out + '\n');
  process.exit(0);
})();
