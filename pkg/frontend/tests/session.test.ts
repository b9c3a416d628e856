import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { SessionViewModel } from '../src/session.js';

const planJson = readFileSync(new URL('./fixtures/fig4_plan.json', import.meta.url), 'utf-8');

// deterministic fake PNG bytes per (caption, seed), mirroring the
// server's reproducibility guarantee that the backend suite proves
function fakePng(caption: string, seed: number): Uint8Array {
  const text = `png:${caption}:${seed}`;
  return new TextEncoder().encode(text.repeat(4));
}

interface MockState {
  runs: { run_id: string; target_caption: string; seed: number }[];
  failNextEditWith?: number;
}

function mockServer(state: MockState) {
  const json = (payload: unknown, status = 200) =>
    new Response(JSON.stringify(payload), {
      status,
      headers: { 'Content-Type': 'application/json' },
    });

  return async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? 'GET';
    if (method === 'POST' && url === '/sessions/s1/edits') {
      if (state.failNextEditWith) {
        const status = state.failNextEditWith;
        state.failNextEditWith = undefined;
        return json({ detail: 'grounding unavailable: it is down' }, status);
      }
      const body = JSON.parse(String(init?.body));
      const run_id = `run${state.runs.length + 1}`;
      state.runs.push({
        run_id,
        target_caption: body.target_caption,
        seed: (body.config?.seed as number) ?? 0,
      });
      return json({ run_id });
    }
    if (url === '/sessions/s1') {
      return json({
        id: 's1',
        source_caption: 'a girl in a red dress sitting on a sofa near a cat',
        created: 'now',
        image_url: '/sessions/s1/image.png',
        runs: state.runs.map((r) => ({
          run_id: r.run_id,
          target_caption: r.target_caption,
          config: { seed: r.seed },
          created: 'now',
          complete: true,
        })),
      });
    }
    const artifactsMatch = url.match(/^\/sessions\/s1\/runs\/(\w+)\/artifacts$/);
    if (artifactsMatch) {
      const base = `/sessions/s1/runs/${artifactsMatch[1]}/artifacts`;
      return json({
        run: { run_id: artifactsMatch[1], complete: true },
        artifacts: {
          'plan.json': `${base}/plan.json`,
          'metrics.json': `${base}/metrics.json`,
          'output.png': `${base}/output.png`,
          'refined_mask.png': `${base}/refined_mask.png`,
        },
      });
    }
    const fileMatch = url.match(/^\/sessions\/s1\/runs\/(\w+)\/artifacts\/(.+)$/);
    if (fileMatch) {
      const run = state.runs.find((r) => r.run_id === fileMatch[1])!;
      if (fileMatch[2] === 'plan.json') {
        return new Response(planJson, { status: 200 });
      }
      if (fileMatch[2] === 'metrics.json') {
        return json({ image: { pwmse: 1.0 }, background: { pwmse: 0.0 } });
      }
      return new Response(fakePng(run.target_caption, run.seed).slice().buffer, { status: 200 });
    }
    return json({ detail: `no route ${url}` }, 404);
  };
}

function makeModel(state: MockState) {
  return new SessionViewModel(new ApiClient('', mockServer(state)));
}

describe('session view model', () => {
  it('submitting twice appends two history cards', async () => {
    const state: MockState = { runs: [] };
    const model = makeModel(state);
    await model.load('s1');
    model.instructionDraft = 'a girl in a blue dress sitting on a bench';
    await model.submitRevision({ seed: 5 });
    model.instructionDraft = 'a girl in a green dress sitting on a bench';
    await model.submitRevision({ seed: 5 });
    expect(model.runs).toHaveLength(2);
    expect(model.runs[0].targetCaption).toContain('blue dress');
    expect(model.runs[1].targetCaption).toContain('green dress');
  });

  it('identical resubmission with the same seed yields identical output hashes', async () => {
    const state: MockState = { runs: [] };
    const model = makeModel(state);
    await model.load('s1');
    model.instructionDraft = 'a girl in a blue dress sitting on a bench';
    const first = await model.submitRevision({ seed: 42 });
    const second = await model.submitRevision({ seed: 42 });
    expect(first!.outputHash).toBe(second!.outputHash);
    const third = await model.submitRevision({ seed: 43 });
    expect(third!.outputHash).not.toBe(first!.outputHash);
  });

  it('reload reconstructs the identical view purely from the API', async () => {
    const state: MockState = { runs: [] };
    const model = makeModel(state);
    await model.load('s1');
    model.instructionDraft = 'a girl in a blue dress sitting on a bench';
    await model.submitRevision({ seed: 7 });

    const reloaded = makeModel(state); // fresh tab, same server state
    await reloaded.load('s1');
    expect(reloaded.sessionId).toBe(model.sessionId);
    expect(reloaded.sourceCaption).toBe(model.sourceCaption);
    expect(reloaded.runs).toEqual(model.runs);
  });

  it('surfaces a retryable error on 503 and recovers on retry', async () => {
    const state: MockState = { runs: [], failNextEditWith: 503 };
    const model = makeModel(state);
    await model.load('s1');
    model.instructionDraft = 'a girl in a blue dress sitting on a bench';
    const failed = await model.submitRevision();
    expect(failed).toBeNull();
    expect(model.lastError?.retryable).toBe(true);
    expect(model.runs).toHaveLength(0);
    const retried = await model.submitRevision();
    expect(retried).not.toBeNull();
    expect(model.lastError).toBeNull();
    expect(model.runs).toHaveLength(1);
  });

  it('surfaces 422 as a non-retryable inline message', async () => {
    const state: MockState = { runs: [], failNextEditWith: 422 };
    const model = makeModel(state);
    await model.load('s1');
    model.instructionDraft = 'a girl in a blue dress sitting on a bench';
    await model.submitRevision();
    expect(model.lastError?.retryable).toBe(false);
  });

  it('rejects empty drafts locally', async () => {
    const state: MockState = { runs: [] };
    const model = makeModel(state);
    await model.load('s1');
    model.instructionDraft = '   ';
    const result = await model.submitRevision();
    expect(result).toBeNull();
    expect(model.lastError?.message).toContain('empty');
  });

  it('overlay toggling never touches artifacts', async () => {
    const state: MockState = { runs: [] };
    const model = makeModel(state);
    await model.load('s1');
    model.instructionDraft = 'a girl in a blue dress sitting on a bench';
    await model.submitRevision({ seed: 1 });
    const before = JSON.stringify(model.runs);
    model.setOverlay('refined');
    model.setOverlay('soft');
    model.setOverlay('none');
    expect(JSON.stringify(model.runs)).toBe(before);
  });
});
