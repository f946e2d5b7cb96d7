/** Typed client for the annotation service HTTP API (the only backend). */

import type { QuestionnaireFields } from './schema.js';

export interface LeaseView {
  annotator: string;
  expires: number;
}

export interface ItemView {
  id: string;
  sample_ids: string[];
  task: string;
  state: string;
  questionnaire: QuestionnaireFields | null;
  draft: string | null;
  revision: string | null;
  variants: string[];
  selection: number | null;
  annotator: string | null;
  timestamps: Record<string, number>;
  lease: LeaseView | null;
  leasable?: boolean;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: unknown };
      if (body.detail !== undefined) {
        detail = Array.isArray(body.detail) ? body.detail.join('; ') : String(body.detail);
      }
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class AnnotationApi {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, '')}${path}`;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return fetch(this.url(path), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    }).then((r) => asJson<T>(r));
  }

  queue(annotator?: string): Promise<ItemView[]> {
    const suffix = annotator ? `?annotator=${encodeURIComponent(annotator)}` : '';
    return fetch(this.url(`/queue${suffix}`))
      .then((r) => asJson<{ items: ItemView[] }>(r))
      .then((body) => body.items);
  }

  item(id: string): Promise<ItemView> {
    return fetch(this.url(`/items/${encodeURIComponent(id)}`)).then((r) => asJson<ItemView>(r));
  }

  lease(id: string, annotator: string): Promise<{ token: string; item: ItemView }> {
    return this.post(`/items/${encodeURIComponent(id)}/lease`, { annotator });
  }

  submitQuestionnaire(id: string, token: string, fields: QuestionnaireFields): Promise<ItemView> {
    return this.post(`/items/${encodeURIComponent(id)}/questionnaire`, { token, fields });
  }

  requestDraft(id: string, token: string): Promise<ItemView> {
    return this.post(`/items/${encodeURIComponent(id)}/draft`, { token });
  }

  submitRevision(id: string, token: string, text: string): Promise<ItemView> {
    return this.post(`/items/${encodeURIComponent(id)}/revision`, { token, text });
  }

  requestVariants(id: string, token: string, k: number): Promise<ItemView> {
    return this.post(`/items/${encodeURIComponent(id)}/variants?k=${k}`, { token });
  }

  selectVariant(
    id: string,
    token: string,
    index: number,
  ): Promise<{ item: ItemView; annotation: Record<string, unknown> }> {
    return this.post(`/items/${encodeURIComponent(id)}/selection`, { token, index });
  }

  /** Audio is served by the same service under /audio. */
  audioUrl(audioPath: string): string {
    return this.url(`/audio/${audioPath.replace(/^\/+/, '')}`);
  }
}
