/**
 * Workbench controller: one annotator session per tab.
 *
 * All state lives on the server; this class renders the queue, walks one
 * item at a time through questionnaire -> draft -> revision -> variants ->
 * selection, and re-polls the queue so server-side transitions show up
 * within one poll interval. Lease tokens are kept in sessionStorage and
 * every mutation goes through the service API.
 */

import { AnnotationApi, ApiError, ItemView } from './api.js';
import { buildDraftReview, buildVariantChooser } from './components/draftPanel.js';
import { buildQueueView, QueueFilters } from './components/queue.js';
import { buildQuestionnaireForm } from './components/questionnaire.js';
import { TaskKind } from './schema.js';

export interface AppOptions {
  annotator: string;
  pollIntervalMs?: number;
  variantCount?: number;
}

export class WorkbenchApp {
  private readonly doc: Document;
  private readonly banner: HTMLElement;
  private readonly queueBox: HTMLElement;
  private readonly detailBox: HTMLElement;
  private filters: QueueFilters = { task: '', state: '' };
  private items: ItemView[] = [];
  private openItemId: string | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: AnnotationApi,
    private readonly options: AppOptions,
  ) {
    this.doc = root.ownerDocument;
    this.banner = this.doc.createElement('div');
    this.banner.className = 'error-banner hidden';
    this.queueBox = this.doc.createElement('section');
    this.queueBox.className = 'queue-box';
    this.detailBox = this.doc.createElement('section');
    this.detailBox.className = 'detail-box';
    root.append(this.banner, this.queueBox, this.detailBox);
  }

  async start(): Promise<void> {
    await this.refreshQueue();
    const interval = this.options.pollIntervalMs ?? 2000;
    if (interval > 0) {
      this.timer = setInterval(() => {
        void this.refreshQueue();
      }, interval);
    }
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  /** Re-render from the server's view of the world. */
  async refreshQueue(): Promise<void> {
    try {
      this.items = await this.api.queue(this.options.annotator);
    } catch (error) {
      this.showError(error);
      return;
    }
    this.renderQueue();
    if (this.openItemId !== null) {
      const open = this.items.find((i) => i.id === this.openItemId);
      if (open) this.renderDetail(open);
    }
  }

  private renderQueue(): void {
    this.queueBox.replaceChildren(
      buildQueueView(
        this.doc,
        this.items,
        this.filters,
        (filters) => {
          this.filters = filters;
          this.renderQueue();
        },
        (id) => {
          void this.openItem(id);
        },
      ),
    );
  }

  async openItem(id: string): Promise<void> {
    this.openItemId = id;
    try {
      const item = await this.api.item(id);
      this.renderDetail(item);
    } catch (error) {
      this.showError(error);
    }
  }

  private tokenKey(id: string): string {
    return `lease:${this.options.annotator}:${id}`;
  }

  private async ensureLease(id: string): Promise<string> {
    const cached = this.doc.defaultView?.sessionStorage.getItem(this.tokenKey(id));
    if (cached) return cached;
    const lease = await this.api.lease(id, this.options.annotator);
    this.doc.defaultView?.sessionStorage.setItem(this.tokenKey(id), lease.token);
    return lease.token;
  }

  private renderDetail(item: ItemView): void {
    const doc = this.doc;
    const header = doc.createElement('h2');
    header.className = 'detail-header';
    header.textContent = `${item.id} [${item.task}] - ${item.state}`;
    const body = doc.createElement('div');
    body.className = 'detail-body';
    body.dataset.state = item.state;

    switch (item.state) {
      case 'pending':
        body.appendChild(this.questionnairePanel(item));
        break;
      case 'questionnaire_done':
        body.appendChild(
          this.actionButton('Generate draft', 'request-draft', () =>
            this.mutate(item.id, (token) => this.api.requestDraft(item.id, token)),
          ),
        );
        break;
      case 'draft_ready':
        body.appendChild(
          buildDraftReview(doc, item.draft ?? '', (text) => {
            void this.mutate(item.id, (token) => this.api.submitRevision(item.id, token, text));
          }),
        );
        break;
      case 'revision_done':
        body.appendChild(
          this.actionButton('Generate variants', 'request-variants', () =>
            this.mutate(item.id, (token) =>
              this.api.requestVariants(item.id, token, this.options.variantCount ?? 3),
            ),
          ),
        );
        break;
      case 'variants_ready':
        body.appendChild(
          buildVariantChooser(doc, item.revision ?? '', item.variants, (index) => {
            void this.mutate(item.id, async (token) => {
              const result = await this.api.selectVariant(item.id, token, index);
              return result.item;
            });
          }),
        );
        break;
      case 'completed': {
        const done = doc.createElement('p');
        done.className = 'completed-description';
        done.textContent = item.variants[item.selection ?? 0] ?? '';
        body.appendChild(done);
        break;
      }
      default:
        body.textContent = `unknown state ${item.state}`;
    }
    this.detailBox.replaceChildren(header, body);
  }

  private questionnairePanel(item: ItemView): HTMLElement {
    const urls = item.sample_ids.map((sid) => this.api.audioUrl(`${sid}.wav`));
    const form = buildQuestionnaireForm(this.doc, item.task as TaskKind, urls, (fields) => {
      void this.mutate(item.id, (token) =>
        this.api.submitQuestionnaire(item.id, token, fields),
      );
    });
    return form.element;
  }

  private actionButton(label: string, className: string, action: () => Promise<void>): HTMLElement {
    const button = this.doc.createElement('button');
    button.type = 'button';
    button.className = className;
    button.textContent = label;
    button.addEventListener('click', () => {
      button.disabled = true;
      void action().finally(() => {
        button.disabled = false;
      });
    });
    return button;
  }

  /**
   * Acquire (or reuse) the lease, run the mutation, re-render from the
   * server reply. Errors surface in the banner; the current panel is left
   * untouched so local edits survive wrong-state or lease conflicts.
   */
  private async mutate(id: string, call: (token: string) => Promise<ItemView>): Promise<void> {
    try {
      const token = await this.ensureLease(id);
      const item = await call(token);
      this.clearError();
      this.renderDetail(item);
      await this.refreshQueue();
    } catch (error) {
      this.showError(error);
    }
  }

  private showError(error: unknown): void {
    const message =
      error instanceof ApiError ? `${error.status}: ${error.detail}` : String(error);
    this.banner.textContent = message;
    this.banner.classList.remove('hidden');
  }

  private clearError(): void {
    this.banner.textContent = '';
    this.banner.classList.add('hidden');
  }
}
