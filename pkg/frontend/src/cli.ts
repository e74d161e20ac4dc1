/** Command line: render one figure per sweep CSV.
 *
 *   node dist/cli.js --csv ../results/fig3_rho.csv --out figures/fig3
 *   node dist/cli.js --csv fig1.csv --out fig1 --y spectral_efficiency_total --agg mean
 */
import { parseArgs } from 'node:util';
import { render } from './render.js';

export function main(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      csv: { type: 'string' },
      out: { type: 'string' },
      y: { type: 'string', default: 'total_utility' },
      axis: { type: 'string' },
      agg: { type: 'string', default: 'mean_stderr' },
    },
  });
  if (!values.csv || !values.out) {
    console.error(
      'usage: cli --csv <sweep.csv> --out <base> [--y col] [--axis col] [--agg mean|mean_stderr]',
    );
    return 2;
  }
  if (values.agg !== 'mean' && values.agg !== 'mean_stderr') {
    console.error(`unknown aggregation '${values.agg}'`);
    return 2;
  }
  try {
    const result = render({
      csvPath: values.csv,
      outputBase: values.out,
      yColumn: values.y,
      axisColumn: values.axis,
      aggregation: values.agg,
    });
    console.log(`wrote ${result.svgPath} and ${result.pngPath}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

import { fileURLToPath } from 'node:url';
if (process.argv[1] === fileURLToPath(import.meta.url)) {
  process.exit(main(process.argv.slice(2)));
}
